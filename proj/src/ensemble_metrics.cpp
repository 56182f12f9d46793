#include "unravel/ensemble_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "unravel/errors.hpp"

namespace unravel {

namespace {

constexpr double kPureTolerance = 1e-6;

void require_pure(const BlochVector& b, const char* what) {
  if (std::abs(b.norm() - 1.0) > kPureTolerance) {
    throw std::invalid_argument(std::string("error_probability: ") + what + " is not pure");
  }
}

}  // namespace

double error_probability(const BlochVector& reference, const BlochVector& candidate) {
  require_pure(reference, "reference");
  require_pure(candidate, "candidate");
  return std::clamp(0.5 * (1.0 - reference.dot(candidate)), 0.0, 1.0);
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n) throw std::invalid_argument("solve_assignment: cost must be n x n");
  if (n == 0) return {};
  // Potentials u (rows), v (columns); way[j] is the previous column on the
  // alternating path. Indices are 1-based, column 0 is the virtual root.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[row_of[j] - 1] = j - 1;
  return assignment;
}

DistanceReport distance_general(const Ensemble& reference, const Ensemble& candidate,
                                const BlochVector& rho) {
  if (reference.size() != candidate.size() || reference.size() == 0) {
    throw std::invalid_argument("distance_general: ensembles must have equal, non-zero size");
  }
  if (!reference.equally_weighted() || !candidate.equally_weighted()) {
    throw std::invalid_argument("distance_general: ensembles must be equally weighted");
  }
  const double mixedness = 1.0 - purity(rho);
  if (!(mixedness > 1e-12)) {
    throw std::invalid_argument("distance_general: rho is pure, distance undefined");
  }
  const std::size_t n = reference.size();
  const auto ref = reference.blochs();
  const auto cand = candidate.blochs();
  // cost[mu][k] = error of stating reference k for candidate mu
  std::vector<double> cost(n * n);
  for (std::size_t mu = 0; mu < n; ++mu) {
    for (std::size_t k = 0; k < n; ++k) cost[mu * n + k] = error_probability(ref[k], cand[mu]);
  }
  DistanceReport rep;
  rep.matching = solve_assignment(cost, n);
  double total = 0.0;
  for (std::size_t mu = 0; mu < n; ++mu) total += cost[mu * n + rep.matching[mu]];
  rep.epsilon_opt = total / static_cast<double>(n);
  rep.distance = std::clamp(rep.epsilon_opt / mixedness, 0.0, 1.0);
  return rep;
}

double distance_to_mru(const AtomParams& p, double mean_abs_u, std::string* warning) {
  if (!(p.omega() > 0.0)) {
    throw DegenerateError("degenerate: stationary state is pure at omega = 0");
  }
  const BlochVector ss = steady_state(p);
  const double u0 = std::sqrt(std::max(1.0 - ss.y * ss.y - ss.z * ss.z, 0.0));
  if (!(mean_abs_u >= 0.0) || mean_abs_u > u0 + 1e-6) {
    throw std::invalid_argument("distance_to_mru: mean |u| outside [0, u_mru]");
  }
  const double d = 1.0 - mean_abs_u / u0;
  if (d < 0.0) {
    if (warning) *warning = "distance_to_mru: clamped negative value " + std::to_string(d) + " to 0";
    return 0.0;
  }
  return d;
}

}  // namespace unravel
