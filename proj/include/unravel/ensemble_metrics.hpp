#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unravel/core_model.hpp"
#include "unravel/survival.hpp"

namespace unravel {

/// 1 - |<phi|psi>|^2 = 1 - (1 + b.b') / 2 for pure states.
/// Throws std::invalid_argument unless both vectors have unit length (1e-6).
double error_probability(const BlochVector& reference, const BlochVector& candidate);

/// Minimum-cost perfect matching on a square row-major cost matrix.
/// Returns assignment[row] = column. Hungarian method, O(n^3).
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

struct DistanceReport {
  double distance = 0.0;
  /// Optimal mean error probability, 1 - max mean fidelity.
  double epsilon_opt = 0.0;
  /// matching[mu] = index of the reference member stated for candidate mu.
  std::vector<std::size_t> matching;
  std::optional<double> stat_error;
};

/// Normalized optimal error probability eps_opt / (1 - Tr[rho^2]) between two
/// equal-weight ensembles of the same size. Throws std::invalid_argument on
/// mismatched sizes, unequal weights or a pure rho.
DistanceReport distance_general(const Ensemble& reference, const Ensemble& candidate,
                                const BlochVector& rho);

/// Closed-form distance from a u -> -u symmetric ensemble to the MRU ensemble,
/// 1 - E|u| / sqrt(1 - y_ss^2 - z_ss^2). Sampling noise pushing the value
/// slightly outside [0, 1] is clamped and reported through `warning`.
/// Throws DegenerateError at omega = 0 and std::invalid_argument when
/// mean_abs_u is negative or exceeds the MRU value by more than 1e-6.
double distance_to_mru(const AtomParams& p, double mean_abs_u, std::string* warning = nullptr);

}  // namespace unravel
