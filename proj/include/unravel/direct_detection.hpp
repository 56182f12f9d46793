#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "unravel/core_model.hpp"
#include "unravel/survival.hpp"

namespace unravel {

/// Unnormalized conditional amplitudes a time t after a detection (which
/// resets the atom to |g>), with no further detection since.
struct NoJumpAmplitudes {
  Complex cg_tilde;
  Complex ce_tilde;
  Complex omega_check;  ///< sqrt(O^2 - (g/2)^2)

  PureState state() const { return PureState{cg_tilde, ce_tilde}.normalized(); }
};

/// sqrt(omega^2 - (gamma/2)^2); imaginary below omega = gamma/2.
Complex omega_check(const AtomParams& p);

/// Throws std::invalid_argument for t < 0.
NoJumpAmplitudes no_jump_amplitudes(const AtomParams& p, double t);

/// Probability of no detection during t after a detection: |c_e|^2 + |c_g|^2.
double p0(const AtomParams& p, double t);

/// Waiting-time density g |c_e(t)|^2 = -dP0/dt.
double waiting_time_density(const AtomParams& p, double t);

/// Simpson quadrature grid over [0, t_max] for the stationary density of the
/// time since the last detection, wp(t) = P0(t) / N with N = int_0^inf P0.
///
/// Below omega = gamma/2 the tail of P0 decays at the slow rate
/// g/2 - |Omega_check|, which vanishes like omega^2/g; the grid spacing is then
/// doubled per segment after 20/g so weak driving stays cheap.
class DirectEnsembleGrid {
public:
  /// Throws DegenerateError at omega = 0 (P0 = 1, no stationary ensemble).
  explicit DirectEnsembleGrid(const AtomParams& p);

  const AtomParams& params() const { return params_; }
  double t_max() const { return times_.back(); }
  double norm_const() const { return norm_const_; }
  const std::vector<double>& times() const { return times_; }
  /// Simpson weights, so that sum_i weights[i] f(times[i]) ~ int f.
  const std::vector<double>& weights() const { return weights_; }
  /// Simpson weights on the half-resolution sub-grid (zero at odd nodes).
  const std::vector<double>& coarse_weights() const { return coarse_weights_; }
  const std::vector<double>& p0_values() const { return p0_; }

  /// Inverse of the stationary CDF (binary search and linear interpolation).
  double sample_time(double r) const;

  /// Smallest t with P0(t) <= r (the waiting-time inverse), r in (0, 1].
  double invert_p0(double r) const;

private:
  AtomParams params_;
  std::vector<double> times_;
  std::vector<double> weights_;
  std::vector<double> coarse_weights_;
  std::vector<double> p0_;
  std::vector<double> cdf_;
  double norm_const_ = 0.0;
};

/// wp(t) = P0(t) / N. Throws std::invalid_argument if t > t_max or if the grid
/// was built for different parameters.
double stationary_weight(const AtomParams& p, const DirectEnsembleGrid& grid, double t);

struct DirectMoments {
  EnsembleMoments moments;
  /// Richardson estimate (fine vs half-resolution Simpson) of the absolute
  /// quadrature error of the moments.
  double quadrature_error = 0.0;
};

DirectMoments direct_moments(const AtomParams& p, const DirectEnsembleGrid& grid);

/// Bloch vector of int P(t) wp(t) dt; equals steady_state(p).
BlochVector reconstruct_rho(const AtomParams& p, const DirectEnsembleGrid& grid);

/// n equal-weight members drawn from wp(t); every member has u = 0.
Ensemble sample_direct_ensemble(const AtomParams& p, std::size_t n, std::uint64_t seed);
Ensemble sample_direct_ensemble(const DirectEnsembleGrid& grid, std::size_t n,
                                std::uint64_t seed);

struct DirectSnapshot {
  double t = 0.0;
  BlochVector bloch;
  double since_jump = 0.0;
};

struct DirectTrajectory {
  std::vector<double> jump_times;
  std::vector<DirectSnapshot> snapshots;
};

/// Quantum-jump trajectory under direct detection starting from |g> at t = 0.
/// Waiting times are drawn exactly by inverting 1 - P0; the state between
/// jumps is the normalized no-jump solution. Snapshots are taken at the
/// requested times (must be sorted and within [0, duration]).
class DirectSimulator {
public:
  explicit DirectSimulator(const AtomParams& p);

  DirectTrajectory run(double duration, std::uint64_t seed,
                       const std::vector<double>& snapshot_times = {}) const;

private:
  AtomParams params_;
  std::optional<DirectEnsembleGrid> grid_;  // empty when omega = 0
};

DirectTrajectory simulate_direct(const AtomParams& p, double duration, std::uint64_t seed,
                                 const std::vector<double>& snapshot_times = {});

}  // namespace unravel
