#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unravel/core_model.hpp"

namespace unravel {

/// Sufficient statistics of a stationary ensemble for its survival curve:
/// V_v = E[v^2] - E[v]^2 and V_w = E[w^2] - E[w]^2 over the members' (y, z)
/// Bloch components.
struct EnsembleMoments {
  double v_var = 0.0;
  double w_var = 0.0;
  double mean_v = 0.0;
  double mean_w = 0.0;
};

/// Weighted list of pure states. Weights are positive and sum to one.
class Ensemble {
public:
  struct Member {
    PureState state;
    double weight;
  };

  Ensemble() = default;
  /// Throws std::invalid_argument on empty input, non-positive weights or
  /// weights not summing to 1 within 1e-9. States are normalized on entry.
  explicit Ensemble(std::vector<Member> members);

  /// Equal-weight ensemble of the given (unit) Bloch vectors.
  static Ensemble uniform(const std::vector<BlochVector>& blochs);

  const std::vector<Member>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  std::vector<BlochVector> blochs() const;
  BlochVector mean_bloch() const;
  /// True if every weight equals 1/N within 1e-9.
  bool equally_weighted() const;

private:
  std::vector<Member> members_;
};

struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> values;
  double equilibrium = 0.0;  ///< Tr[rho_ss^2]
};

struct SurvivalTime {
  double tau = 0.0;
  /// |dS/dt| < 1e-6 at the crossing: the curve grazes the target and the
  /// first crossing is ill-conditioned.
  bool near_tangent = false;
};

/// (f+, f-)(t) = -e^{-gt/2} + e^{-3gt/4}(cos Wt +- (g/4) sin(Wt)/W).
std::pair<double, double> f_pair(const AtomParams& p, double t);

/// (1 + b . b(t)) / 2 for a pure Bloch vector b; rejects |b| != 1 (1e-6) and t < 0.
double state_survival(const AtomParams& p, const BlochVector& b, double t);

/// Closed-form ensemble survival probability from the moments.
double ensemble_survival(const AtomParams& p, const EnsembleMoments& m, double t);

/// Direct weighted average of state_survival over the members.
double ensemble_average_survival(const AtomParams& p, const Ensemble& e, double t);

/// Largest V_v + V_w compatible with E[u^2] >= 0, i.e. 1 - y_ss^2 - z_ss^2.
double max_total_variance(const AtomParams& p);

/// A warning message when the moments are negative or exceed max_total_variance.
std::optional<std::string> moments_warning(const AtomParams& p, const EnsembleMoments& m);

/// The half-way target (1 + Tr[rho_ss^2]) / 2.
double survival_target(const AtomParams& p);

/// Scan step used by survival_time: min(1/g, 2 pi / max(Re W, g)) / 200.
double survival_scan_step(const AtomParams& p);

/// First t with S(t) = target, by forward scan with `step` then bisection to
/// 1e-10 relative. Throws ConvergenceError if no crossing before `horizon`.
SurvivalTime first_crossing(const std::function<double(double)>& survival, double target,
                            double step, double horizon);

/// Survival time of the stationary ensemble with these moments. Throws
/// DegenerateError when omega = 0 (pure stationary state).
SurvivalTime survival_time(const AtomParams& p, const EnsembleMoments& m);

SurvivalCurve survival_curve(const AtomParams& p, const EnsembleMoments& m, double t_max,
                             std::size_t n_points);

EnsembleMoments moments_from_ensemble(const Ensemble& e);

}  // namespace unravel
