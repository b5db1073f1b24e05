#pragma once

#include <vector>

#include "topolow/configuration.hpp"
#include "topolow/dense_matrix.hpp"
#include "topolow/dissimilarity.hpp"

namespace topolow {

struct EigenDecomposition {
  std::vector<double> values;  // descending
  DenseMatrix vectors;         // column k pairs with values[k]
  int sweeps = 0;
};

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations. Stops when
/// the off-diagonal Frobenius norm drops below 1e-12 * ||B||_F. Throws
/// DomainError for non-square or non-symmetric input, NumericalError if the
/// sweep limit is reached.
EigenDecomposition symmetric_eigen(const DenseMatrix& b);

/// Complete symmetric matrix for the baseline: per unordered pair the mean
/// of the observed directions (censored cells contribute their threshold),
/// unobserved pairs take the global median of the exact values, zero
/// diagonal. Throws ValidationError when there are no exact values.
DenseMatrix median_impute(const DissimilarityMatrix& d);

/// Torgerson scaling: coordinates V_N Lambda_N^(1/2) from the top positive
/// eigenpairs of the Gram matrix. N is clamped (with a warning) to the number
/// of positive eigenvalues. Eigenvector signs are fixed so the first nonzero
/// component is positive.
Configuration classical_mds(const DenseMatrix& complete, int dimension);

}  // namespace topolow
