#include <cmath>

#include "topolow/configuration.hpp"
#include "topolow/kernels.hpp"

namespace topolow::kernels::serial {

namespace {
inline double point_distance(const DenseMatrix& coords, std::size_t i, std::size_t j) noexcept {
  const auto a = coords.row(i);
  const auto b = coords.row(j);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}
}  // namespace

void pairwise_distances(const DenseMatrix& coords, DenseMatrix& out) {
  const std::size_t m = coords.rows();
  if (out.rows() != m || out.cols() != m) out = DenseMatrix(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    out(i, i) = 0.0;
    for (std::size_t j = i + 1; j < m; ++j) out(i, j) = out(j, i) = point_distance(coords, i, j);
  }
}

double abs_residual_sum(const DenseMatrix& coords, std::span<const ResidualTerm> terms) {
  double sum = 0.0;
  for (const auto& t : terms) sum += std::abs(t.target - point_distance(coords, t.i, t.j));
  return sum;
}

DenseMatrix double_center_squared(const DenseMatrix& distances) {
  const std::size_t m = distances.rows();
  DenseMatrix b(m, m);
  std::vector<double> row_mean(m, 0.0), col_mean(m, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double sq = distances(i, j) * distances(i, j);
      row_mean[i] += sq;
      col_mean[j] += sq;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(m);
    col_mean[i] /= static_cast<double>(m);
  }
  grand /= static_cast<double>(m) * static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      b(i, j) = -0.5 * (distances(i, j) * distances(i, j) - row_mean[i] - col_mean[j] + grand);
  return b;
}

StressSums stress_sums(const DenseMatrix& truth, const DenseMatrix& embedded) {
  StressSums sums;
  const std::size_t m = truth.rows();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double e = truth(i, j) - embedded(i, j);
      sums.squared_error += e * e;
      sums.squared_truth += truth(i, j) * truth(i, j);
    }
  }
  return sums;
}

}  // namespace topolow::kernels::serial

namespace topolow {

DenseMatrix Configuration::distances() const {
  DenseMatrix out;
  kernels::parallel::pairwise_distances(coords_, out);
  return out;
}

}  // namespace topolow
