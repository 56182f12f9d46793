#include "unravel/cmu_sse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "unravel/errors.hpp"
#include "unravel/parallel.hpp"

namespace unravel {

namespace {

constexpr std::size_t kBlocks = 20;

/// Noise generator with the phase/amplitude factors precomputed.
class NoiseSource {
public:
  NoiseSource(const Upsilon& u, double dt)
      : rot_(std::polar(1.0, 0.5 * std::arg(u.value()))),
        a_(std::sqrt(0.5 * (1.0 + std::abs(u.value())))),
        b_(std::sqrt(0.5 * (1.0 - std::abs(u.value())))),
        sqrt_dt_(std::sqrt(dt)) {}

  Complex operator()(Rng& rng) {
    const double n1 = normal_(rng);
    const double n2 = normal_(rng);
    return rot_ * Complex{a_ * n1, b_ * n2} * sqrt_dt_;
  }

private:
  Complex rot_;
  double a_;
  double b_;
  double sqrt_dt_;
  std::normal_distribution<double> normal_;
};

inline PureState step_unchecked(double gamma, double omega, Complex upsilon, const PureState& s,
                                Complex dw, double dt) {
  const Complex mean_lower = std::conj(s.cg) * s.ce;  // <sigma>
  const Complex j_dt = gamma * (upsilon * mean_lower + std::conj(mean_lower)) * dt +
                       std::sqrt(gamma) * dw;
  const Complex rabi{0.0, -0.5 * omega * dt};
  PureState out{s.cg + rabi * s.ce + j_dt * s.ce, s.ce + rabi * s.cg - 0.5 * gamma * dt * s.ce};
  const double n2 = out.norm2();
  if (!(n2 > 1e-300) || !std::isfinite(n2)) {
    throw ConvergenceError("sse_step: state norm collapsed (step too large?)");
  }
  const double inv = 1.0 / std::sqrt(n2);
  out.cg *= inv;
  out.ce *= inv;
  return out;
}

struct Moments {
  double n = 0, u = 0, abs_u = 0, v = 0, vv = 0, w = 0, ww = 0;

  void add(const BlochVector& b) {
    n += 1.0;
    u += b.x;
    abs_u += std::abs(b.x);
    v += b.y;
    vv += b.y * b.y;
    w += b.z;
    ww += b.z * b.z;
  }
};

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double std_error_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  return std::sqrt(s / (n - 1.0) / n);
}

}  // namespace

Upsilon::Upsilon(Complex value) : value_(value) {
  if (!(std::abs(value) <= 1.0 + 1e-12)) {
    throw std::invalid_argument("upsilon must satisfy |v| <= 1");
  }
  if (std::abs(value) > 1.0) value_ = value / std::abs(value);
}

Upsilon Upsilon::polar(double radius, double phase) {
  return Upsilon(std::polar(radius, phase));
}

NoiseIncrement sample_noise(const Upsilon& u, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_noise: dt must be > 0");
  return {NoiseSource(u, dt)(rng)};
}

Complex current_drift(const AtomParams& p, const Upsilon& u, const PureState& psi) {
  const PureState n = psi.normalized();
  const Complex mean_lower = std::conj(n.cg) * n.ce;
  return p.gamma() * (u.value() * mean_lower + std::conj(mean_lower));
}

PureState sse_step(const AtomParams& p, const Upsilon& u, const PureState& psi,
                   const NoiseIncrement& dw, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sse_step: dt must be > 0");
  return step_unchecked(p.gamma(), p.omega(), u.value(), psi.normalized(), dw.dw, dt);
}

SseConfig SseConfig::defaults(const AtomParams& p, std::uint64_t seed) {
  SseConfig c;
  const double g = p.gamma();
  c.dt = 0.01 * std::min(1.0 / g, p.omega() > 0.0 ? 1.0 / p.omega() : 1.0 / g);
  c.burn_in = 20.0 / g;
  c.duration = 2000.0 / g;
  c.snapshot_interval = 0.5 / g;
  c.seed = seed;
  return c;
}

void SseConfig::validate(const AtomParams& p) const {
  const double g = p.gamma();
  const double dt_max = 0.01 * std::min(1.0 / g, p.omega() > 0.0 ? 1.0 / p.omega() : 1.0 / g);
  if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12)) {
    throw std::invalid_argument("SseConfig: dt must be in (0, 0.01 min(1/gamma, 1/omega)]");
  }
  if (!(burn_in >= 10.0 / g * (1.0 - 1e-12))) {
    throw std::invalid_argument("SseConfig: burn_in must be >= 10/gamma");
  }
  if (!(duration >= 100.0 / g * (1.0 - 1e-12))) {
    throw std::invalid_argument("SseConfig: duration must be >= 100/gamma");
  }
  if (n_trajectories == 0) throw std::invalid_argument("SseConfig: need >= 1 trajectory");
  if (!(snapshot_interval > 0.0)) {
    throw std::invalid_argument("SseConfig: snapshot_interval must be > 0");
  }
  if (noise_substeps == 0) throw std::invalid_argument("SseConfig: noise_substeps must be >= 1");
}

CmuStats simulate_cmu(const AtomParams& p, const Upsilon& u, const SseConfig& cfg) {
  cfg.validate(p);
  const double g = p.gamma();
  const double o = p.omega();
  const Complex ups = u.value();
  const auto burn_steps = static_cast<std::size_t>(std::llround(cfg.burn_in / cfg.dt));
  const auto run_steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
  const auto snap_every =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.snapshot_interval / cfg.dt)));
  const std::size_t block_len = std::max<std::size_t>(1, run_steps / kBlocks);

  std::vector<Moments> blocks;
  CmuStats stats;
  Complex current_sum{0.0};
  Complex drift_sum{0.0};

  for (std::size_t traj = 0; traj < cfg.n_trajectories; ++traj) {
    Rng rng = make_rng(cfg.seed, traj);
    NoiseSource noise(u, cfg.dt / static_cast<double>(cfg.noise_substeps));
    auto draw = [&] {
      Complex dw{0.0};
      for (std::size_t s = 0; s < cfg.noise_substeps; ++s) dw += noise(rng);
      return dw;
    };
    PureState psi = PureState::ground();
    for (std::size_t k = 0; k < burn_steps; ++k) {
      psi = step_unchecked(g, o, ups, psi, draw(), cfg.dt);
    }
    const std::size_t first_block = blocks.size();
    blocks.resize(first_block + kBlocks);
    for (std::size_t k = 0; k < run_steps; ++k) {
      const Complex dw = draw();
      const Complex mean_lower = std::conj(psi.cg) * psi.ce;
      const Complex drift = g * (ups * mean_lower + std::conj(mean_lower));
      drift_sum += drift;
      current_sum += drift + std::sqrt(g) * dw / cfg.dt;
      psi = step_unchecked(g, o, ups, psi, dw, cfg.dt);
      const BlochVector b = psi.bloch();
      blocks[first_block + std::min(k / block_len, kBlocks - 1)].add(b);
      if ((k + 1) % snap_every == 0) stats.snapshots.push_back(b);
    }
  }

  std::vector<double> bu, babs, bv, bw, bvar_v, bvar_w;
  Moments total;
  for (const auto& m : blocks) {
    if (m.n == 0) continue;
    bu.push_back(m.u / m.n);
    babs.push_back(m.abs_u / m.n);
    bv.push_back(m.v / m.n);
    bw.push_back(m.w / m.n);
    bvar_v.push_back(m.vv / m.n - (m.v / m.n) * (m.v / m.n));
    bvar_w.push_back(m.ww / m.n - (m.w / m.n) * (m.w / m.n));
    total.n += m.n;
    total.u += m.u;
    total.abs_u += m.abs_u;
    total.v += m.v;
    total.vv += m.vv;
    total.w += m.w;
    total.ww += m.ww;
  }
  const double n = total.n;
  stats.moments.mean_v = total.v / n;
  stats.moments.mean_w = total.w / n;
  stats.moments.v_var = std::max(total.vv / n - stats.moments.mean_v * stats.moments.mean_v, 0.0);
  stats.moments.w_var = std::max(total.ww / n - stats.moments.mean_w * stats.moments.mean_w, 0.0);
  stats.mean_abs_u = total.abs_u / n;
  stats.mean_u = total.u / n;
  stats.v_var_error = std_error_of(bvar_v);
  stats.w_var_error = std_error_of(bvar_w);
  stats.mean_v_error = std_error_of(bv);
  stats.mean_w_error = std_error_of(bw);
  stats.mean_abs_u_error = std_error_of(babs);
  stats.mean_u_error = std_error_of(bu);
  stats.mean_current = current_sum / n;
  stats.mean_current_drift = drift_sum / n;
  return stats;
}

TrajectoryAverage cmu_average(const AtomParams& p, const Upsilon& u, const PureState& psi0,
                              double dt, const std::vector<double>& checkpoints,
                              std::size_t n_trajectories, std::uint64_t seed) {
  if (!(dt > 0.0)) throw std::invalid_argument("cmu_average: dt must be > 0");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) || checkpoints.empty()) {
    throw std::invalid_argument("cmu_average: checkpoints must be non-empty and sorted");
  }
  std::vector<std::size_t> steps;
  for (double t : checkpoints) steps.push_back(static_cast<std::size_t>(std::llround(t / dt)));
  BlochAccumulator acc(checkpoints);
  const PureState start = psi0.normalized();
  for (std::size_t traj = 0; traj < n_trajectories; ++traj) {
    Rng rng = make_rng(seed, traj);
    NoiseSource noise(u, dt);
    PureState psi = start;
    std::size_t k = 0;
    for (std::size_t c = 0; c < steps.size(); ++c) {
      for (; k < steps[c]; ++k) psi = step_unchecked(p.gamma(), p.omega(), u.value(), psi, noise(rng), dt);
      acc.add(c, psi.bloch());
    }
    acc.finish_trajectory();
  }
  return acc.result();
}

SearchCell evaluate_cell(const AtomParams& p, Complex upsilon, const CmuStats& stats) {
  SearchCell cell;
  cell.upsilon = upsilon;
  cell.moments = stats.moments;
  cell.tau = survival_time(p, stats.moments).tau;
  EnsembleMoments mv = stats.moments;
  mv.v_var += stats.v_var_error;
  EnsembleMoments mw = stats.moments;
  mw.w_var += stats.w_var_error;
  const double dv = survival_time(p, mv).tau - cell.tau;
  const double dw = survival_time(p, mw).tau - cell.tau;
  cell.tau_error = std::sqrt(dv * dv + dw * dw);
  return cell;
}

MrcmuResult mrcmu_search(const AtomParams& p, const SseConfig& cfg, const SearchGrid& grid) {
  cfg.validate(p);
  if (grid.n_radii < 2 || grid.n_phases < 1) {
    throw std::invalid_argument("mrcmu_search: need >= 2 radii and >= 1 phase");
  }
  MrcmuResult res;
  res.radial_step = 1.0 / static_cast<double>(grid.n_radii - 1);
  res.phase_step = 2.0 * std::numbers::pi / static_cast<double>(grid.n_phases);

  struct Point {
    double r;
    double phase;
    bool refined;
  };
  std::vector<Point> points{{0.0, 0.0, false}};
  for (std::size_t i = 1; i < grid.n_radii; ++i) {
    for (std::size_t j = 0; j < grid.n_phases; ++j) {
      points.push_back({static_cast<double>(i) * res.radial_step,
                        static_cast<double>(j) * res.phase_step, false});
    }
  }

  auto evaluate = [&](const std::vector<Point>& pts, std::size_t seed_offset) {
    return parallel_map<SearchCell>(pts.size(), [&](std::size_t i) {
      SseConfig c = cfg;
      c.seed = mix_seed(cfg.seed, seed_offset + i);
      Complex ups = std::polar(pts[i].r, pts[i].phase);
      if (std::abs(ups.imag()) < 1e-14) ups.imag(0.0);  // real-axis cells exactly real
      SearchCell cell = evaluate_cell(p, ups, simulate_cmu(p, Upsilon(ups), c));
      cell.refined = pts[i].refined;
      return cell;
    });
  };
  res.cells = evaluate(points, 0);

  auto argmax = [&] {
    return static_cast<std::size_t>(
        std::max_element(res.cells.begin(), res.cells.end(),
                         [](const SearchCell& a, const SearchCell& b) { return a.tau < b.tau; }) -
        res.cells.begin());
  };

  if (grid.refine) {
    const SearchCell best = res.cells[argmax()];
    const double r0 = std::abs(best.upsilon);
    const double ph0 = std::arg(best.upsilon);
    std::vector<Point> extra;
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const double r = r0 + 0.5 * di * res.radial_step;
        if (r < 0.0 || r > 1.0 + 1e-12) continue;
        if (r0 == 0.0 && dj != 0) continue;
        extra.push_back({std::min(r, 1.0), ph0 + 0.5 * dj * res.phase_step, true});
      }
    }
    auto refined = evaluate(extra, points.size());
    res.cells.insert(res.cells.end(), refined.begin(), refined.end());
  }

  res.best = argmax();
  double second = -1.0;
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    if (i != res.best && res.cells[i].tau > second) {
      second = res.cells[i].tau;
      res.runner_up = i;
    }
  }
  const SearchCell& b = res.cells[res.best];
  const SearchCell& r = res.cells[res.runner_up];
  res.separated = b.tau - r.tau > 2.0 * std::hypot(b.tau_error, r.tau_error);

  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    if (std::abs(res.cells[i].upsilon.imag()) < 1e-9 && res.cells[i].tau < lowest) {
      lowest = res.cells[i].tau;
      res.real_axis_min = i;
    }
  }
  return res;
}

}  // namespace unravel
