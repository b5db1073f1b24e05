#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "topolow/dense_matrix.hpp"

namespace topolow {

/// m points in R^N, one row per object.
class Configuration {
 public:
  Configuration() = default;
  Configuration(std::size_t points, std::size_t dimension) : coords_(points, dimension) {}
  explicit Configuration(DenseMatrix coords) : coords_(std::move(coords)) {}

  std::size_t size() const noexcept { return coords_.rows(); }
  std::size_t dimension() const noexcept { return coords_.cols(); }

  std::span<double> point(std::size_t i) noexcept { return coords_.row(i); }
  std::span<const double> point(std::size_t i) const noexcept { return coords_.row(i); }

  double distance(std::size_t i, std::size_t j) const noexcept {
    const auto a = coords_.row(i);
    const auto b = coords_.row(j);
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double diff = a[k] - b[k];
      sum += diff * diff;
    }
    return std::sqrt(sum);
  }

  const DenseMatrix& coords() const noexcept { return coords_; }
  DenseMatrix& coords() noexcept { return coords_; }

  bool finite() const noexcept {
    for (double v : coords_.data())
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Full m x m Euclidean distance matrix.
  DenseMatrix distances() const;

  bool operator==(const Configuration&) const = default;

 private:
  DenseMatrix coords_;
};

}  // namespace topolow
