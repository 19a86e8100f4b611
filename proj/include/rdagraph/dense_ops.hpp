#pragma once

#include <Eigen/Dense>

namespace rdag {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// e^{tA} by scaling and squaring with a diagonal Pade approximant of degree
/// 3, 5, 7, 9 or 13, chosen from ||tA||_1 (Higham 2005 thresholds).
/// Throws std::invalid_argument for non-square or non-finite input.
DenseMatrix matrix_exp(const DenseMatrix& A, double t);

DenseMatrix kron(const DenseMatrix& A, const DenseMatrix& B);

struct SymEig {
  Vector values;        ///< ascending
  DenseMatrix vectors;  ///< orthonormal columns
};

/// Eigendecomposition of a symmetric matrix. Rejects inputs whose asymmetry exceeds
/// 1e-12 relative to their Frobenius norm; throws NumericalError on non-convergence.
SymEig sym_eig(const DenseMatrix& S);

}  // namespace rdag
