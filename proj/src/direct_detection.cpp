#include "unravel/direct_detection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "unravel/errors.hpp"
#include "unravel/rng.hpp"

namespace unravel {

namespace {

constexpr std::size_t kSegmentIntervals = 1000;  // divisible by 4 for the coarse rule
constexpr double kTailRelative = 1e-12;

struct Integrands {
  double p0;
  double x;  // unnormalized Bloch components
  double y;
  double z;
};

Integrands integrands(const AtomParams& p, double t) {
  const NoJumpAmplitudes a = no_jump_amplitudes(p, t);
  const Complex coh = std::conj(a.ce_tilde) * a.cg_tilde;
  const double pe = std::norm(a.ce_tilde);
  const double pg = std::norm(a.cg_tilde);
  return {pe + pg, 2.0 * coh.real(), 2.0 * coh.imag(), pe - pg};
}

}  // namespace

Complex omega_check(const AtomParams& p) {
  const double h = p.gamma() / 2.0;
  return std::sqrt(Complex{p.omega() * p.omega() - h * h, 0.0});
}

NoJumpAmplitudes no_jump_amplitudes(const AtomParams& p, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("no_jump_amplitudes: t must be >= 0");
  const double g = p.gamma();
  const Complex w = omega_check(p);
  const double kappa = w.imag();
  double c = 0.0;  // e^{-g t/4} cos(W t/2)
  double s = 0.0;  // e^{-g t/4} sin(W t/2) / W
  if (kappa * t > 1.0) {
    // W = i kappa: split cosh/sinh into decaying exponentials so that large t
    // does not overflow. g/4 - kappa/2 = (O^2/4) / (g/4 + kappa/2).
    const double slow = std::exp(-0.25 * p.omega() * p.omega() / (0.25 * g + 0.5 * kappa) * t);
    const double fast = std::exp(-(0.25 * g + 0.5 * kappa) * t);
    c = 0.5 * (slow + fast);
    s = 0.5 * (slow - fast) / kappa;
  } else {
    // cos(W t/2) and sin(W t/2)/W are real for real or imaginary W.
    const double env = std::exp(-0.25 * g * t);
    c = std::cos(0.5 * w * t).real() * env;
    s = sin_over(w, 0.5 * t).real() * env;
  }
  return {Complex{c + 0.5 * g * s, 0.0}, Complex{0.0, -p.omega() * s}, w};
}

double p0(const AtomParams& p, double t) {
  const NoJumpAmplitudes a = no_jump_amplitudes(p, t);
  return std::norm(a.ce_tilde) + std::norm(a.cg_tilde);
}

double waiting_time_density(const AtomParams& p, double t) {
  return p.gamma() * std::norm(no_jump_amplitudes(p, t).ce_tilde);
}

DirectEnsembleGrid::DirectEnsembleGrid(const AtomParams& p) : params_(p) {
  if (!(p.omega() > 0.0)) {
    throw DegenerateError("degenerate: no detections occur at omega = 0");
  }
  const double g = p.gamma();
  const double wc = std::abs(omega_check(p));
  const bool oscillatory = p.omega() > 0.5 * g;
  double h = 0.02 / g;
  if (wc > 0.0) h = std::min(h, 0.02 * 2.0 * std::numbers::pi / wc);
  // decay rate of P0 in the overdamped case, g/2 - |W| = O^2 / (g/2 + |W|)
  const double slow_rate = oscillatory ? 0.5 * g : p.omega() * p.omega() / (0.5 * g + wc);
  const double cap = oscillatory ? 80.0 / g : std::max(80.0 / g, 100.0 / slow_rate);
  const double h_cap = oscillatory ? h : std::max(h, 0.05 / slow_rate);

  times_.push_back(0.0);
  weights_.push_back(0.0);
  coarse_weights_.push_back(0.0);
  p0_.push_back(1.0);

  double t0 = 0.0;
  double integral = 0.0;
  for (;;) {
    const std::size_t base = times_.size() - 1;
    for (std::size_t k = 1; k <= kSegmentIntervals; ++k) {
      const double t = t0 + static_cast<double>(k) * h;
      times_.push_back(t);
      p0_.push_back(p0(p, t));
      weights_.push_back(0.0);
      coarse_weights_.push_back(0.0);
    }
    for (std::size_t k = 0; k <= kSegmentIntervals; ++k) {
      const bool end = k == 0 || k == kSegmentIntervals;
      weights_[base + k] += h / 3.0 * (end ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0));
      if (k % 2 == 0) {
        const std::size_t kc = k / 2;
        coarse_weights_[base + k] +=
            2.0 * h / 3.0 * (end ? 1.0 : (kc % 2 == 1 ? 4.0 : 2.0));
      }
    }
    for (std::size_t k = 0; k <= kSegmentIntervals; ++k) {
      const bool end = k == 0 || k == kSegmentIntervals;
      integral += h / 3.0 * (end ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0)) * p0_[base + k];
    }
    t0 = times_.back();
    if (p0_.back() < kTailRelative * integral) break;
    if (t0 >= cap) {
      if (p0_.back() < 1e-10 * integral) break;
      throw ConvergenceError("direct-detection grid: P0 tail not resolved before the cap");
    }
    if (!oscillatory && t0 >= 20.0 / g) h = std::min(2.0 * h, h_cap);
  }
  norm_const_ = integral;

  cdf_.assign(times_.size(), 0.0);
  for (std::size_t i = 1; i < times_.size(); ++i) {
    cdf_[i] = cdf_[i - 1] + 0.5 * (p0_[i] + p0_[i - 1]) * (times_[i] - times_[i - 1]);
  }
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
}

double DirectEnsembleGrid::sample_time(double r) const {
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), r);
  if (it == cdf_.begin()) return 0.0;
  if (it == cdf_.end()) return times_.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  const double span = cdf_[i] - cdf_[i - 1];
  const double frac = span > 0.0 ? (r - cdf_[i - 1]) / span : 0.0;
  return times_[i - 1] + frac * (times_[i] - times_[i - 1]);
}

double DirectEnsembleGrid::invert_p0(double r) const {
  if (r >= 1.0) return 0.0;
  double lo = 0.0;
  double hi = 0.0;
  if (r >= p0_.back()) {
    // p0_ is nonincreasing; find the first node at or below r.
    const auto it = std::lower_bound(p0_.begin(), p0_.end(), r, std::greater<double>());
    const std::size_t i = static_cast<std::size_t>(it - p0_.begin());
    hi = times_[i];
    lo = times_[i > 0 ? i - 1 : 0];
  } else {
    lo = times_.back();
    hi = 2.0 * lo;
    while (p0(params_, hi) > r) {
      lo = hi;
      hi *= 2.0;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(hi, 1.0); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (p0(params_, mid) > r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double stationary_weight(const AtomParams& p, const DirectEnsembleGrid& grid, double t) {
  if (p.gamma() != grid.params().gamma() || p.omega() != grid.params().omega()) {
    throw std::invalid_argument("stationary_weight: grid was built for different parameters");
  }
  if (!(t >= 0.0) || t > grid.t_max()) {
    throw std::invalid_argument("stationary_weight: t outside [0, t_max]");
  }
  return p0(p, t) / grid.norm_const();
}

DirectMoments direct_moments(const AtomParams& p, const DirectEnsembleGrid& grid) {
  const auto& t = grid.times();
  const auto& wf = grid.weights();
  const auto& wc = grid.coarse_weights();
  // fine / coarse sums of: y, z, y^2/P0, z^2/P0
  double fy = 0, fz = 0, fyy = 0, fzz = 0, cy = 0, cz = 0, cyy = 0, czz = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Integrands f = integrands(p, t[i]);
    const double yy = f.y * f.y / f.p0;
    const double zz = f.z * f.z / f.p0;
    fy += wf[i] * f.y;
    fz += wf[i] * f.z;
    fyy += wf[i] * yy;
    fzz += wf[i] * zz;
    cy += wc[i] * f.y;
    cz += wc[i] * f.z;
    cyy += wc[i] * yy;
    czz += wc[i] * zz;
  }
  const double n = grid.norm_const();
  DirectMoments out;
  out.moments.mean_v = fy / n;
  out.moments.mean_w = fz / n;
  out.moments.v_var = std::max(fyy / n - out.moments.mean_v * out.moments.mean_v, 0.0);
  out.moments.w_var = std::max(fzz / n - out.moments.mean_w * out.moments.mean_w, 0.0);
  const double ev = std::abs(fyy - cyy) / 15.0 / n + 2.0 * std::abs(fy - cy) / 15.0 / n;
  const double ew = std::abs(fzz - czz) / 15.0 / n + 2.0 * std::abs(fz - cz) / 15.0 / n;
  out.quadrature_error = std::max(ev, ew);
  return out;
}

BlochVector reconstruct_rho(const AtomParams& p, const DirectEnsembleGrid& grid) {
  const auto& t = grid.times();
  const auto& w = grid.weights();
  BlochVector acc;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Integrands f = integrands(p, t[i]);
    acc += w[i] * BlochVector{f.x, f.y, f.z};
  }
  return (1.0 / grid.norm_const()) * acc;
}

Ensemble sample_direct_ensemble(const DirectEnsembleGrid& grid, std::size_t n,
                                std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_direct_ensemble: n must be >= 1");
  Rng rng = make_rng(seed);
  const double w = 1.0 / static_cast<double>(n);
  std::vector<Ensemble::Member> members;
  members.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.sample_time(uniform01(rng));
    members.push_back({no_jump_amplitudes(grid.params(), t).state(), w});
  }
  double total = 0.0;
  for (const auto& m : members) total += m.weight;
  members.back().weight += 1.0 - total;
  return Ensemble(std::move(members));
}

Ensemble sample_direct_ensemble(const AtomParams& p, std::size_t n, std::uint64_t seed) {
  return sample_direct_ensemble(DirectEnsembleGrid(p), n, seed);
}

DirectSimulator::DirectSimulator(const AtomParams& p) : params_(p) {
  if (p.omega() > 0.0) grid_.emplace(p);
}

DirectTrajectory DirectSimulator::run(double duration, std::uint64_t seed,
                                      const std::vector<double>& snapshot_times) const {
  if (!(duration > 0.0)) throw std::invalid_argument("simulate_direct: duration must be > 0");
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
    throw std::invalid_argument("simulate_direct: snapshot times must be sorted");
  }
  DirectTrajectory out;
  Rng rng = make_rng(seed);
  double last_reset = 0.0;
  std::size_t next_snap = 0;
  auto emit_until = [&](double t_end) {
    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] < t_end) {
      const double s = snapshot_times[next_snap++];
      if (s < 0.0 || s > duration) {
        throw std::invalid_argument("simulate_direct: snapshot time outside [0, duration]");
      }
      const double since = s - last_reset;
      out.snapshots.push_back({s, no_jump_amplitudes(params_, since).state().bloch(), since});
    }
  };
  if (!grid_) {
    emit_until(std::numeric_limits<double>::infinity());
    return out;
  }
  for (;;) {
    const double r = 1.0 - uniform01(rng);  // (0, 1]
    const double jump = last_reset + grid_->invert_p0(r);
    if (jump > duration) break;
    emit_until(jump);
    out.jump_times.push_back(jump);
    last_reset = jump;
  }
  emit_until(std::numeric_limits<double>::infinity());
  return out;
}

DirectTrajectory simulate_direct(const AtomParams& p, double duration, std::uint64_t seed,
                                 const std::vector<double>& snapshot_times) {
  return DirectSimulator(p).run(duration, seed, snapshot_times);
}

}  // namespace unravel
