#include "unravel/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "unravel/errors.hpp"

namespace unravel {

Ensemble::Ensemble(std::vector<Member> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("ensemble must have at least one member");
  double total = 0.0;
  for (auto& m : members_) {
    if (!(m.weight > 0.0)) throw std::invalid_argument("ensemble weights must be positive");
    m.state = m.state.normalized();
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("ensemble weights must sum to 1");
  }
}

Ensemble Ensemble::uniform(const std::vector<BlochVector>& blochs) {
  if (blochs.empty()) throw std::invalid_argument("ensemble must have at least one member");
  const double w = 1.0 / static_cast<double>(blochs.size());
  std::vector<Member> members;
  members.reserve(blochs.size());
  for (const auto& b : blochs) members.push_back({PureState::from_bloch(b), w});
  // Repeated 1/N rounding can drift past the sum tolerance for huge N.
  Ensemble e;
  e.members_ = std::move(members);
  return e;
}

std::vector<BlochVector> Ensemble::blochs() const {
  std::vector<BlochVector> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.state.bloch());
  return out;
}

BlochVector Ensemble::mean_bloch() const {
  BlochVector acc;
  for (const auto& m : members_) acc += m.weight * m.state.bloch();
  return acc;
}

bool Ensemble::equally_weighted() const {
  const double w = 1.0 / static_cast<double>(members_.size());
  return std::all_of(members_.begin(), members_.end(),
                     [w](const Member& m) { return std::abs(m.weight - w) <= 1e-9; });
}

std::pair<double, double> f_pair(const AtomParams& p, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("f_pair: t must be >= 0");
  const double g = p.gamma();
  const Complex w = omega_tilde(p);
  const double c = std::cos(w * t).real();
  const double s = (0.25 * g * sin_over(w, t)).real();
  const double slow = std::exp(-0.5 * g * t);
  const double fast = std::exp(-0.75 * g * t);
  return {-slow + fast * (c + s), -slow + fast * (c - s)};
}

double state_survival(const AtomParams& p, const BlochVector& b, double t) {
  if (std::abs(b.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("state_survival: Bloch vector is not pure");
  }
  if (!(t >= 0.0)) throw std::invalid_argument("state_survival: t must be >= 0");
  return 0.5 * (1.0 + b.dot(bloch_evolve(p, b, t)));
}

double ensemble_survival(const AtomParams& p, const EnsembleMoments& m, double t) {
  const BlochVector ss = steady_state(p);
  const double a = ss.y * ss.y + ss.z * ss.z;
  const auto [fp, fm] = f_pair(p, t);
  return 0.5 * (1.0 + a) +
         0.5 * ((1.0 - a) * std::exp(-0.5 * p.gamma() * t) + m.v_var * fp + m.w_var * fm);
}

double ensemble_average_survival(const AtomParams& p, const Ensemble& e, double t) {
  double s = 0.0;
  for (const auto& m : e.members()) s += m.weight * state_survival(p, m.state.bloch(), t);
  return s;
}

double max_total_variance(const AtomParams& p) {
  const BlochVector ss = steady_state(p);
  return 1.0 - ss.y * ss.y - ss.z * ss.z;
}

std::optional<std::string> moments_warning(const AtomParams& p, const EnsembleMoments& m) {
  const double cap = max_total_variance(p);
  std::ostringstream msg;
  if (m.v_var < 0.0 || m.w_var < 0.0) {
    msg << "negative variance (V_v=" << m.v_var << ", V_w=" << m.w_var << ")";
    return msg.str();
  }
  if (m.v_var + m.w_var > cap * (1.0 + 1e-9) + 1e-15) {
    msg << "V_v + V_w = " << m.v_var + m.w_var << " exceeds 1 - y_ss^2 - z_ss^2 = " << cap
        << " (implies E[u^2] < 0)";
    return msg.str();
  }
  return std::nullopt;
}

double survival_target(const AtomParams& p) { return 0.5 * (1.0 + purity(steady_state(p))); }

double survival_scan_step(const AtomParams& p) {
  const double g = p.gamma();
  const double w_real = std::max(omega_tilde(p).real(), 0.0);
  return std::min(1.0 / g, 2.0 * std::numbers::pi / std::max(w_real, g)) / 200.0;
}

SurvivalTime first_crossing(const std::function<double(double)>& survival, double target,
                            double step, double horizon) {
  if (survival(0.0) - target <= 0.0) return {0.0, false};
  double t0 = 0.0;
  for (std::size_t k = 1; t0 < horizon; ++k) {
    const double t1 = static_cast<double>(k) * step;
    if (survival(t1) - target <= 0.0) {
      double lo = t0;
      double hi = t1;
      while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (survival(mid) - target > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double tau = 0.5 * (lo + hi);
      const double h = std::max(1e-7 * tau, 1e-12);
      const double slope = (survival(tau + h) - survival(std::max(tau - h, 0.0))) /
                           (tau + h - std::max(tau - h, 0.0));
      return {tau, std::abs(slope) < 1e-6};
    }
    t0 = t1;
  }
  throw ConvergenceError("survival curve does not reach its half-way value before the horizon");
}

SurvivalTime survival_time(const AtomParams& p, const EnsembleMoments& m) {
  if (!(p.omega() > 0.0)) {
    throw DegenerateError("degenerate: stationary state is pure (omega = 0)");
  }
  const double target = survival_target(p);
  return first_crossing([&](double t) { return ensemble_survival(p, m, t); }, target,
                        survival_scan_step(p), 50.0 / p.gamma());
}

SurvivalCurve survival_curve(const AtomParams& p, const EnsembleMoments& m, double t_max,
                             std::size_t n_points) {
  if (!(t_max >= 0.0)) throw std::invalid_argument("survival_curve: t_max must be >= 0");
  if (n_points == 0) throw std::invalid_argument("survival_curve: need at least one point");
  SurvivalCurve c;
  c.equilibrium = purity(steady_state(p));
  if (t_max == 0.0) n_points = 1;
  for (std::size_t i = 0; i < n_points; ++i) {
    const double t =
        n_points == 1 ? 0.0 : t_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
    c.times.push_back(t);
    c.values.push_back(ensemble_survival(p, m, t));
  }
  return c;
}

EnsembleMoments moments_from_ensemble(const Ensemble& e) {
  double sv = 0.0, sw = 0.0, svv = 0.0, sww = 0.0;
  for (const auto& m : e.members()) {
    const BlochVector b = m.state.bloch();
    sv += m.weight * b.y;
    sw += m.weight * b.z;
    svv += m.weight * b.y * b.y;
    sww += m.weight * b.z * b.z;
  }
  return {std::max(svv - sv * sv, 0.0), std::max(sww - sw * sw, 0.0), sv, sw};
}

}  // namespace unravel
