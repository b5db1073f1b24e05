#include "topolow/classical_mds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "topolow/common.hpp"
#include "topolow/metrics.hpp"

namespace topolow {

namespace {

constexpr int kMaxSweeps = 100;

double frobenius(const DenseMatrix& a) {
  double sum = 0.0;
  for (double v : a.data()) sum += v * v;
  return std::sqrt(sum);
}

double off_diagonal_norm(const DenseMatrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

EigenDecomposition symmetric_eigen(const DenseMatrix& b) {
  if (!b.square()) throw DomainError("eigendecomposition needs a square matrix");
  const std::size_t n = b.rows();
  double max_abs = 0.0;
  for (double v : b.data()) max_abs = std::max(max_abs, std::abs(v));
  const double sym_tol = 1e-10 * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(b(i, j) - b(j, i)) > sym_tol) throw DomainError("matrix is not symmetric");

  DenseMatrix a = b;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (b(i, j) + b(j, i));
  DenseMatrix v = DenseMatrix::identity(n);
  const double target = 1e-12 * frobenius(a);

  int sweep = 0;
  for (; off_diagonal_norm(a) > target; ++sweep) {
    if (sweep >= kMaxSweeps) throw NumericalError("Jacobi eigensolver did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  EigenDecomposition out{std::vector<double>(n), DenseMatrix(n, n), sweep};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(idx[k], idx[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, idx[k]);
  }
  return out;
}

DenseMatrix median_impute(const DissimilarityMatrix& d) {
  const std::size_t m = d.size();
  std::vector<double> exact;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && d.at(i, j).is_exact()) exact.push_back(d.at(i, j).value);
  if (exact.empty()) throw ValidationError("median imputation needs at least one exact value");
  const double median = median_of(std::move(exact));

  DenseMatrix out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double sum = 0.0;
      int count = 0;
      for (const auto* cell : {&d.at(i, j), &d.at(j, i)}) {
        if (cell->observed()) {
          sum += cell->value;
          ++count;
        }
      }
      out(i, j) = out(j, i) = count > 0 ? sum / count : median;
    }
  }
  return out;
}

Configuration classical_mds(const DenseMatrix& complete, int dimension) {
  if (dimension < 1) throw DomainError("dimension must be at least 1");
  const auto eig = symmetric_eigen(gram_matrix(symmetrize(complete)));
  double max_abs = 0.0;
  for (double l : eig.values) max_abs = std::max(max_abs, std::abs(l));
  const double tol = 1e-9 * max_abs;
  const auto positive = static_cast<int>(
      std::count_if(eig.values.begin(), eig.values.end(), [&](double l) { return l > tol; }));
  if (positive == 0) throw DomainError("Gram matrix has no positive eigenvalue");
  if (dimension > positive) {
    warn("classical MDS: requested dimension " + std::to_string(dimension) + " exceeds the " +
         std::to_string(positive) + " positive eigenvalues; clamping");
    dimension = positive;
  }

  const std::size_t m = complete.rows();
  Configuration config(m, static_cast<std::size_t>(dimension));
  for (std::size_t k = 0; k < static_cast<std::size_t>(dimension); ++k) {
    double sign = 1.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (std::abs(eig.vectors(r, k)) > 1e-12) {
        sign = eig.vectors(r, k) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    const double root = std::sqrt(eig.values[k]);
    for (std::size_t r = 0; r < m; ++r) config.point(r)[k] = sign * eig.vectors(r, k) * root;
  }
  return config;
}

}  // namespace topolow
