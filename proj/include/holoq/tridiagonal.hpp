// Real symmetric tridiagonal eigensolvers (LAPACK dstevr).

#ifndef HOLOQ_TRIDIAGONAL_HPP
#define HOLOQ_TRIDIAGONAL_HPP

#include <span>

#include <Eigen/Dense>

namespace holoq {

struct TridiagonalEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k pairs with values[k]; empty if not requested
};

/// Eigenpairs with indices [0, count) of the matrix with the given diagonal
/// and sub-diagonal (size n - 1). count = -1 selects the whole spectrum.
TridiagonalEigen tridiagonal_eigen(std::span<const double> diagonal,
                                   std::span<const double> sub_diagonal, int count = -1,
                                   bool want_vectors = true);

/// Same, for a constant sub-diagonal.
TridiagonalEigen tridiagonal_eigen(std::span<const double> diagonal, double sub_diagonal,
                                   int count = -1, bool want_vectors = true);

}  // namespace holoq

#endif  // HOLOQ_TRIDIAGONAL_HPP
