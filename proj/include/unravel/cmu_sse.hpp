#pragma once

#include <cstdint>
#include <vector>

#include "unravel/core_model.hpp"
#include "unravel/rng.hpp"
#include "unravel/survival.hpp"
#include "unravel/trajectory_average.hpp"

namespace unravel {

/// Complex parameter |v| <= 1 selecting a continuous Markovian unraveling:
/// E[dW^2] = v dt. v = 0 is quantum state diffusion; v = 1 measures the
/// sigma_x quadrature.
class Upsilon {
public:
  /// Throws std::invalid_argument when |value| > 1 (+1e-12).
  explicit Upsilon(Complex value);
  static Upsilon polar(double radius, double phase);

  Complex value() const { return value_; }

private:
  Complex value_;
};

struct NoiseIncrement {
  Complex dw;
};

/// dW = e^{i theta/2} (a N1 + i b N2) sqrt(dt), a = sqrt((1+|v|)/2),
/// b = sqrt((1-|v|)/2), so E[dW* dW] = dt and E[dW^2] = v dt.
NoiseIncrement sample_noise(const Upsilon& u, double dt, Rng& rng);

/// Deterministic part of the current, g <v sigma + sigma^dag>.
Complex current_drift(const AtomParams& p, const Upsilon& u, const PureState& psi);

/// One Euler-Maruyama (Ito) step of
///   d|psi> = dt [-iH - (g/2) s^dag s + J s] |psi>,  J dt = g<v s + s^dag> dt + sqrt(g) dW,
/// followed by renormalization. Throws ConvergenceError if the norm collapses.
PureState sse_step(const AtomParams& p, const Upsilon& u, const PureState& psi,
                   const NoiseIncrement& dw, double dt);

struct SseConfig {
  double dt = 1e-3;
  double burn_in = 20.0;
  double duration = 2000.0;
  std::size_t n_trajectories = 1;
  std::uint64_t seed = 1;
  double snapshot_interval = 0.5;
  /// Noise is drawn on a grid dt / noise_substeps and summed per step, so runs
  /// with (dt, 2) and (dt/2, 1) share one Brownian path.
  std::size_t noise_substeps = 1;

  /// dt = 0.01 min(1/g, 1/O), burn-in 20/g, duration 2000/g, snapshots every 0.5/g.
  static SseConfig defaults(const AtomParams& p, std::uint64_t seed = 1);
  /// Throws std::invalid_argument unless dt <= 0.01 min(1/g, 1/O),
  /// burn_in >= 10/g and duration >= 100/g.
  void validate(const AtomParams& p) const;
};

struct CmuStats {
  EnsembleMoments moments;
  double v_var_error = 0.0;
  double w_var_error = 0.0;
  double mean_v_error = 0.0;
  double mean_w_error = 0.0;
  double mean_abs_u = 0.0;
  double mean_abs_u_error = 0.0;
  double mean_u = 0.0;  ///< ~0 for real v by u -> -u symmetry
  double mean_u_error = 0.0;
  Complex mean_current;        ///< time average of J
  Complex mean_current_drift;  ///< time average of g <v s + s^dag>
  std::vector<BlochVector> snapshots;

  Ensemble sampled_ensemble() const { return Ensemble::uniform(snapshots); }
};

/// Ergodic time averages over n_trajectories trajectories started in |g>.
/// Error bars come from 20 blocks per trajectory.
CmuStats simulate_cmu(const AtomParams& p, const Upsilon& u, const SseConfig& cfg);

/// Average Bloch vector over n trajectories from psi0 at the given checkpoints
/// (rounded to the step grid).
TrajectoryAverage cmu_average(const AtomParams& p, const Upsilon& u, const PureState& psi0,
                              double dt, const std::vector<double>& checkpoints,
                              std::size_t n_trajectories, std::uint64_t seed);

struct SearchGrid {
  std::size_t n_radii = 9;  ///< radii i/(n_radii - 1), i = 0..n_radii-1
  std::size_t n_phases = 16;
  bool refine = true;
};

struct SearchCell {
  Complex upsilon;
  double tau = 0.0;
  double tau_error = 0.0;
  EnsembleMoments moments;
  bool refined = false;
};

struct MrcmuResult {
  std::vector<SearchCell> cells;
  std::size_t best = 0;
  std::size_t runner_up = 0;
  /// Best and runner-up differ by more than twice their combined error.
  bool separated = false;
  /// Minimum survival time among cells on the real axis.
  std::size_t real_axis_min = 0;
  double radial_step = 0.0;
  double phase_step = 0.0;
};

/// Survival time of simulate_cmu moments over a polar grid on the closed unit
/// disc, plus a half-step refinement around the best cell.
MrcmuResult mrcmu_search(const AtomParams& p, const SseConfig& cfg, const SearchGrid& grid = {});

/// Survival time with error propagated from the moment error bars.
SearchCell evaluate_cell(const AtomParams& p, Complex upsilon, const CmuStats& stats);

}  // namespace unravel
