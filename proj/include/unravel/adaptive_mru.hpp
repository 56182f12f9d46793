#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "unravel/core_model.hpp"
#include "unravel/matrix2.hpp"
#include "unravel/survival.hpp"

namespace unravel {

/// The two members (+-u0, y_ss, z_ss), u0 = sqrt(1 - y_ss^2 - z_ss^2), of the
/// maximally robust ensemble, each with weight 1/2.
struct MruEnsemble {
  BlochVector b_plus;
  BlochVector b_minus;
};

/// Throws DegenerateError at omega = 0 (the stationary state is pure).
MruEnsemble mru_pair(const AtomParams& p);
Ensemble mru_ensemble(const AtomParams& p);

/// 1/2 (1 + a) + 1/2 (1 - a) e^{-g t / 2} with a = y_ss^2 + z_ss^2.
double mru_survival(const AtomParams& p, double t);

/// State of the adaptive interferometric scheme: the detected field is
/// proportional to sigma + mu with mu = +-1/2, flipped at every detection.
struct AdaptiveState {
  PureState psi;
  double mu = 0.5;
  double t_since_jump = 0.0;
};

/// Normalized (sigma + mu)|psi>.
PureState adaptive_jump(const PureState& psi, double mu);

/// Detection rate g <(sigma^dag + mu)(sigma + mu)> on a normalized state.
double adaptive_jump_rate(const AtomParams& p, const PureState& psi, double mu);

/// The 2x2 no-jump generator -iH - (g/2) s^dag s - g mu s - (g/2) mu^2 in the
/// {|g>, |e>} basis, row-major.
Matrix2 adaptive_generator(const AtomParams& p, double mu);

struct AdaptiveConfig {
  double duration = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  /// Portion discarded before lock-on and occupation statistics.
  double transient = 0.0;
  double initial_mu = 0.5;
  /// Sorted times at which to record the Bloch vector (rounded to the step grid).
  std::vector<double> snapshot_times;
  /// Throw ConvergenceError when the post-transient states do not lock on.
  bool require_lock = true;

  /// dt = 0.01 min(1/g, 1/O), transient = 20/g.
  static AdaptiveConfig defaults(const AtomParams& p, double duration, std::uint64_t seed);
};

struct AdaptiveSnapshot {
  double t = 0.0;
  BlochVector bloch;
  double mu = 0.0;
};

struct AdaptiveRecord {
  std::vector<double> jump_times;
  /// mu in force after each detection (the LO history).
  std::vector<double> mu_after_jump;
  std::vector<AdaptiveSnapshot> snapshots;

  std::size_t post_transient_jumps = 0;
  double post_transient_time = 0.0;
  double detection_rate = 0.0;
  double detection_rate_error = 0.0;  ///< Poisson standard error
  /// Fraction of post-transient time nearer P+ than P-, with standard error
  /// from the dwell-time spread.
  double occupation_plus = 0.0;
  double occupation_error = 0.0;
  /// Largest post-transient Bloch distance to the nearer of P+-.
  double max_lock_error = 0.0;
  /// Sign of u of the locked state observed while mu = +1/2 (0 if never seen).
  int pairing_u_sign_at_mu_plus = 0;
};

/// Quantum-jump simulation of the adaptive scheme from |g>. Between
/// detections the unnormalized state is propagated with the exact step
/// propagator exp(G dt); a detection occurs in the step where its norm^2
/// first drops below a uniform variate.
AdaptiveRecord simulate_adaptive(const AtomParams& p, const AdaptiveConfig& cfg);

}  // namespace unravel
