#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace specdet {

// Uniform grid on the unit frequency cube [0,1)^dim with nodes at
// multiples of 1/n_axis along every axis.  Node k (unwound, row major:
// the first axis is the slowest) sits at nu_l = i_l / n_axis.
struct FrequencyGrid {
  int dim = 1;
  int n_axis = 4096;

  FrequencyGrid() = default;
  FrequencyGrid(int dim_, int n_axis_) : dim(dim_), n_axis(n_axis_) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("FrequencyGrid: dim must be 1, 2 or 3");
    if (n_axis < 1) throw std::invalid_argument("FrequencyGrid: n_axis must be positive");
  }

  static FrequencyGrid default_for(int dim) {
    switch (dim) {
      case 1: return FrequencyGrid(1, 4096);
      case 2: return FrequencyGrid(2, 256);
      case 3: return FrequencyGrid(3, 64);
      default: throw std::invalid_argument("FrequencyGrid: dim must be 1, 2 or 3");
    }
  }

  std::int64_t size() const {
    std::int64_t n = 1;
    for (int d = 0; d < dim; ++d) n *= n_axis;
    return n;
  }

  double cell_measure() const { return 1.0 / static_cast<double>(size()); }

  Eigen::VectorXd node(std::int64_t k) const {
    Eigen::VectorXd nu(dim);
    for (int d = dim - 1; d >= 0; --d) {
      nu[d] = static_cast<double>(k % n_axis) / n_axis;
      k /= n_axis;
    }
    return nu;
  }

  // Nearest grid node to an arbitrary point of the unit cube (periodic).
  std::int64_t nearest(const Eigen::VectorXd& nu) const {
    if (nu.size() != dim) throw std::invalid_argument("FrequencyGrid::nearest: dimension mismatch");
    std::int64_t k = 0;
    for (int d = 0; d < dim; ++d) {
      auto i = static_cast<std::int64_t>(std::llround(nu[d] * n_axis)) % n_axis;
      if (i < 0) i += n_axis;
      k = k * n_axis + i;
    }
    return k;
  }

  bool operator==(const FrequencyGrid& o) const { return dim == o.dim && n_axis == o.n_axis; }
};

// Row-major unwound index over an anisotropic lattice n1 x n2 x ... as used
// for multilevel covariance blocks and sensor fields.
inline std::int64_t unwound_index(const std::vector<int>& idx, const std::vector<int>& shape) {
  std::int64_t k = 0;
  for (std::size_t d = 0; d < shape.size(); ++d) k = k * shape[d] + idx[d];
  return k;
}

}  // namespace specdet
