#include "unravel/adaptive_mru.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "unravel/errors.hpp"
#include "unravel/rng.hpp"

namespace unravel {

namespace {

constexpr double kLockTolerance = 1e-3;

PureState propagate(const Matrix2& m, const PureState& s) {
  return {m[0] * s.cg + m[1] * s.ce, m[2] * s.cg + m[3] * s.ce};
}

}  // namespace

MruEnsemble mru_pair(const AtomParams& p) {
  if (!(p.omega() > 0.0)) {
    throw DegenerateError("degenerate: stationary state is pure at omega = 0");
  }
  const BlochVector ss = steady_state(p);
  const double u0 = std::sqrt(std::max(1.0 - ss.y * ss.y - ss.z * ss.z, 0.0));
  return {{u0, ss.y, ss.z}, {-u0, ss.y, ss.z}};
}

Ensemble mru_ensemble(const AtomParams& p) {
  const MruEnsemble pair = mru_pair(p);
  return Ensemble({{PureState::from_bloch(pair.b_plus), 0.5},
                   {PureState::from_bloch(pair.b_minus), 0.5}});
}

double mru_survival(const AtomParams& p, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("mru_survival: t must be >= 0");
  const BlochVector ss = steady_state(p);
  const double a = ss.y * ss.y + ss.z * ss.z;
  return 0.5 * (1.0 + a) + 0.5 * (1.0 - a) * std::exp(-0.5 * p.gamma() * t);
}

PureState adaptive_jump(const PureState& psi, double mu) {
  return PureState{psi.ce + mu * psi.cg, mu * psi.ce}.normalized();
}

double adaptive_jump_rate(const AtomParams& p, const PureState& psi, double mu) {
  const PureState n = psi.normalized();
  const PureState j{n.ce + mu * n.cg, mu * n.ce};
  return p.gamma() * j.norm2();
}

Matrix2 adaptive_generator(const AtomParams& p, double mu) {
  const double g = p.gamma();
  const Complex half_rabi{0.0, -0.5 * p.omega()};  // -i O/2
  const double offset = -0.5 * g * mu * mu;
  return {Complex{offset}, half_rabi - g * mu, half_rabi, Complex{-0.5 * g + offset}};
}

AdaptiveConfig AdaptiveConfig::defaults(const AtomParams& p, double duration,
                                        std::uint64_t seed) {
  AdaptiveConfig c;
  c.duration = duration;
  c.dt = 0.01 * std::min(1.0 / p.gamma(), p.omega() > 0.0 ? 1.0 / p.omega() : 1.0 / p.gamma());
  c.seed = seed;
  c.transient = 20.0 / p.gamma();
  return c;
}

AdaptiveRecord simulate_adaptive(const AtomParams& p, const AdaptiveConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.duration > 0.0)) {
    throw std::invalid_argument("simulate_adaptive: dt and duration must be positive");
  }
  if (std::abs(std::abs(cfg.initial_mu) - 0.5) > 1e-15) {
    throw std::invalid_argument("simulate_adaptive: |mu| must be 1/2");
  }
  if (!std::is_sorted(cfg.snapshot_times.begin(), cfg.snapshot_times.end())) {
    throw std::invalid_argument("simulate_adaptive: snapshot times must be sorted");
  }
  const bool track_lock = cfg.duration > cfg.transient;
  const MruEnsemble pair = track_lock ? mru_pair(p) : MruEnsemble{};
  const Matrix2 step_plus = expm(adaptive_generator(p, 0.5), cfg.dt);
  const Matrix2 step_minus = expm(adaptive_generator(p, -0.5), cfg.dt);

  Rng rng = make_rng(cfg.seed);
  AdaptiveRecord rec;
  AdaptiveState st{PureState::ground(), cfg.initial_mu, 0.0};
  PureState unnorm = st.psi;  // norm^2 = no-detection probability since last jump
  double threshold = 1.0 - uniform01(rng);

  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
  std::size_t next_snap = 0;
  double time_plus = 0.0;
  double dwell_start = cfg.transient;
  std::vector<double> dwells;

  auto record_snapshots = [&](std::size_t k) {
    const double t = static_cast<double>(k) * cfg.dt;
    while (next_snap < cfg.snapshot_times.size() &&
           cfg.snapshot_times[next_snap] <= t + 0.5 * cfg.dt) {
      rec.snapshots.push_back({cfg.snapshot_times[next_snap], st.psi.bloch(), st.mu});
      ++next_snap;
    }
  };
  record_snapshots(0);

  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    unnorm = propagate(st.mu > 0.0 ? step_plus : step_minus, unnorm);
    const double n2 = unnorm.norm2();
    if (n2 <= threshold) {
      st.psi = adaptive_jump(unnorm, st.mu);
      st.mu = -st.mu;
      st.t_since_jump = 0.0;
      unnorm = st.psi;
      threshold = 1.0 - uniform01(rng);
      rec.jump_times.push_back(t);
      rec.mu_after_jump.push_back(st.mu);
      if (t > cfg.transient) {
        ++rec.post_transient_jumps;
        dwells.push_back(t - dwell_start);
        dwell_start = t;
      }
    } else {
      // threshold >= 2^-53, so n2 stays far from underflow
      st.psi = unnorm.normalized();
      st.t_since_jump += cfg.dt;
    }
    if (track_lock && t > cfg.transient) {
      const BlochVector b = st.psi.bloch();
      const double err = std::min((b - pair.b_plus).norm(), (b - pair.b_minus).norm());
      rec.max_lock_error = std::max(rec.max_lock_error, err);
      if (b.x > 0.0) time_plus += cfg.dt;
      if (rec.pairing_u_sign_at_mu_plus == 0 && err < kLockTolerance && st.mu > 0.0) {
        rec.pairing_u_sign_at_mu_plus = b.x > 0.0 ? 1 : -1;
      }
    }
    record_snapshots(k);
  }

  const double total = static_cast<double>(n_steps) * cfg.dt;
  rec.post_transient_time = std::max(total - cfg.transient, 0.0);
  if (rec.post_transient_time > 0.0) {
    const double n = static_cast<double>(rec.post_transient_jumps);
    rec.detection_rate = n / rec.post_transient_time;
    rec.detection_rate_error = std::sqrt(std::max(n, 1.0)) / rec.post_transient_time;
    rec.occupation_plus = time_plus / rec.post_transient_time;
    if (dwells.size() > 1) {
      double mean = 0.0;
      for (double d : dwells) mean += d;
      mean /= static_cast<double>(dwells.size());
      double var = 0.0;
      for (double d : dwells) var += (d - mean) * (d - mean);
      var /= static_cast<double>(dwells.size() - 1);
      rec.occupation_error =
          std::sqrt(static_cast<double>(dwells.size()) * var) / (2.0 * rec.post_transient_time);
    }
    if (cfg.require_lock && rec.max_lock_error > kLockTolerance) {
      throw ConvergenceError("simulate_adaptive: states did not lock onto the two projectors");
    }
  }
  return rec;
}

}  // namespace unravel
