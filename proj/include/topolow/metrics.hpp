#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "topolow/configuration.hpp"
#include "topolow/dense_matrix.hpp"

namespace topolow {

/// (M + M^T) / 2.
DenseMatrix symmetrize(const DenseMatrix& m);

/// sqrt(sum_{i<j} (M_ij - Dhat_ij)^2 / sum_{i<j} M_ij^2), with M symmetrized
/// first. Throws DomainError on shape mismatch or all-zero M.
double normalized_stress(const DenseMatrix& truth, const DenseMatrix& embedded);

struct ShepardPair {
  double truth;
  double embedded;
};
using ShepardPairs = std::vector<ShepardPair>;

/// All i<j pairs in row-major order (truth symmetrized).
ShepardPairs shepard_pairs(const DenseMatrix& truth, const DenseMatrix& embedded);

struct Correlation {
  double pearson_r;
  double r_squared;  // simple regression with intercept, equals r^2
};

/// Throws DomainError with fewer than 2 pairs or zero variance.
Correlation correlation_stats(const ShepardPairs& pairs);

/// B = -1/2 J (D o D) J for a complete symmetric matrix.
DenseMatrix gram_matrix(const DenseMatrix& d);

/// Sum |negative eigenvalues| / sum positive eigenvalues of gram_matrix(d),
/// eigenvalues within 1e-9 * max|lambda| of zero ignored. 0 for
/// Euclidean-embeddable input. Throws DomainError without positive
/// eigenvalues.
double deviation_score(const DenseMatrix& d);

struct EvaluationReport {
  double normalized_stress = 0.0;
  double pearson_r = 0.0;
  double r_squared = 0.0;
  double deviation_score = 0.0;  // of the (symmetrized) truth
  std::size_t n_pairs = 0;
};

EvaluationReport evaluate(const DenseMatrix& truth, const DenseMatrix& embedded);
EvaluationReport evaluate(const DenseMatrix& truth, const Configuration& config);

}  // namespace topolow
