#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "unravel/core_model.hpp"

namespace unravel {

/// Trajectory-averaged Bloch vectors at fixed checkpoints, with the standard
/// error of each component.
struct TrajectoryAverage {
  std::vector<double> times;
  std::vector<BlochVector> mean;
  std::vector<BlochVector> std_error;
  std::size_t n_trajectories = 0;
};

/// Accumulates per-checkpoint sums of Bloch components and their squares.
class BlochAccumulator {
public:
  explicit BlochAccumulator(std::vector<double> times)
      : times_(std::move(times)), sum_(times_.size()), sum_sq_(times_.size()) {}

  void add(std::size_t checkpoint, const BlochVector& b) {
    sum_[checkpoint] += b;
    sum_sq_[checkpoint] += BlochVector{b.x * b.x, b.y * b.y, b.z * b.z};
  }
  void finish_trajectory() { ++n_; }

  TrajectoryAverage result() const {
    if (n_ < 2) throw std::logic_error("BlochAccumulator: need at least two trajectories");
    TrajectoryAverage out;
    out.times = times_;
    out.n_trajectories = n_;
    const double n = static_cast<double>(n_);
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const BlochVector m = (1.0 / n) * sum_[i];
      const BlochVector m2 = (1.0 / n) * sum_sq_[i];
      auto se = [n](double mean, double mean_sq) {
        return std::sqrt(std::max(mean_sq - mean * mean, 0.0) * n / (n - 1.0) / n);
      };
      out.mean.push_back(m);
      out.std_error.push_back({se(m.x, m2.x), se(m.y, m2.y), se(m.z, m2.z)});
    }
    return out;
  }

private:
  std::vector<double> times_;
  std::vector<BlochVector> sum_;
  std::vector<BlochVector> sum_sq_;
  std::size_t n_ = 0;
};

}  // namespace unravel
