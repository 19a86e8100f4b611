#include "rdagraph/dense_ops.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "rdagraph/errors.hpp"

namespace rdag {

namespace {

constexpr std::array<double, 4> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152e0;

constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                           30270240.0,    2162160.0,    110880.0,     3960.0,
                                           90.0,          1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// U (odd part) and V (even part) of the degree-m Pade numerator for m <= 9.
template <std::size_t N>
void pade_low(const DenseMatrix& A, const std::array<double, N>& b, DenseMatrix& U, DenseMatrix& V) {
  const Eigen::Index n = A.rows();
  const DenseMatrix ident = DenseMatrix::Identity(n, n);
  const DenseMatrix A2 = A * A;
  DenseMatrix power = ident;
  DenseMatrix odd = DenseMatrix::Zero(n, n);
  DenseMatrix even = DenseMatrix::Zero(n, n);
  for (std::size_t k = 0; k + 1 < N; k += 2) {
    even += b[k] * power;
    odd += b[k + 1] * power;
    power = power * A2;
  }
  U = A * odd;
  V = even;
}

void pade13(const DenseMatrix& A, DenseMatrix& U, DenseMatrix& V) {
  const auto& b = kPade13;
  const Eigen::Index n = A.rows();
  const DenseMatrix ident = DenseMatrix::Identity(n, n);
  const DenseMatrix A2 = A * A;
  const DenseMatrix A4 = A2 * A2;
  const DenseMatrix A6 = A4 * A2;
  const DenseMatrix inner_u = b[13] * A6 + b[11] * A4 + b[9] * A2;
  U = A * (A6 * inner_u + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident);
  const DenseMatrix inner_v = b[12] * A6 + b[10] * A4 + b[8] * A2;
  V = A6 * inner_v + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident;
}

}  // namespace

DenseMatrix matrix_exp(const DenseMatrix& A, double t) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix_exp: matrix must be square");
  if (!std::isfinite(t) || !A.allFinite()) throw std::invalid_argument("matrix_exp: non-finite input");
  const Eigen::Index n = A.rows();
  if (n == 0) return DenseMatrix(0, 0);

  const DenseMatrix tA = t * A;
  const double norm1 = tA.cwiseAbs().colwise().sum().maxCoeff();
  DenseMatrix U, V;
  int squarings = 0;
  if (norm1 <= kTheta[0]) {
    pade_low(tA, kPade3, U, V);
  } else if (norm1 <= kTheta[1]) {
    pade_low(tA, kPade5, U, V);
  } else if (norm1 <= kTheta[2]) {
    pade_low(tA, kPade7, U, V);
  } else if (norm1 <= kTheta[3]) {
    pade_low(tA, kPade9, U, V);
  } else {
    if (norm1 > kTheta13) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
    pade13(tA * std::ldexp(1.0, -squarings), U, V);
  }
  DenseMatrix result = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) result = result * result;
  if (!result.allFinite()) throw NumericalError("matrix_exp: result is not finite");
  return result;
}

DenseMatrix kron(const DenseMatrix& A, const DenseMatrix& B) {
  DenseMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

SymEig sym_eig(const DenseMatrix& S) {
  if (S.rows() != S.cols()) throw std::invalid_argument("sym_eig: matrix must be square");
  const double scale = S.norm();
  if ((S - S.transpose()).norm() > 1e-12 * std::max(scale, 1e-300)) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(0.5 * (S + S.transpose()));
  if (solver.info() != Eigen::Success) throw NumericalError("sym_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace rdag
