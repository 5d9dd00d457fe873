#include "mtf/expm.hpp"

#include <cmath>
#include <stdexcept>

namespace mtf {

namespace {

// Pade numerator coefficients for degrees 3..13 and the norm thresholds
// below which each degree keeps the backward error under double roundoff.
const double kTheta3 = 1.495585217958292e-2;
const double kTheta5 = 2.539398330063230e-1;
const double kTheta7 = 9.504178996162932e-1;
const double kTheta9 = 2.097847961257068e0;
const double kTheta13 = 5.371920351148152e0;

Matrix pade_solve(const Matrix& U, const Matrix& V) {
  // r = (V - U)^{-1} (V + U)
  return (V - U).partialPivLu().solve(V + U);
}

Matrix expm_pade3(const Matrix& A, const Matrix& A2) {
  static const double b[] = {120, 60, 12, 1};
  Matrix I = Matrix::Identity(A.rows(), A.cols());
  Matrix U = A * (b[3] * A2 + b[1] * I);
  Matrix V = b[2] * A2 + b[0] * I;
  return pade_solve(U, V);
}

Matrix expm_pade5(const Matrix& A, const Matrix& A2, const Matrix& A4) {
  static const double b[] = {30240, 15120, 3360, 420, 30, 1};
  Matrix I = Matrix::Identity(A.rows(), A.cols());
  Matrix U = A * (b[5] * A4 + b[3] * A2 + b[1] * I);
  Matrix V = b[4] * A4 + b[2] * A2 + b[0] * I;
  return pade_solve(U, V);
}

Matrix expm_pade7(const Matrix& A, const Matrix& A2, const Matrix& A4,
                  const Matrix& A6) {
  static const double b[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
  Matrix I = Matrix::Identity(A.rows(), A.cols());
  Matrix U = A * (b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  Matrix V = b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  return pade_solve(U, V);
}

Matrix expm_pade9(const Matrix& A, const Matrix& A2, const Matrix& A4,
                  const Matrix& A6, const Matrix& A8) {
  static const double b[] = {17643225600.0, 8821612800.0, 2075673600.0,
                             302702400.0,  30270240.0,   2162160.0,
                             110880.0,     3960.0,       90.0,
                             1.0};
  Matrix I = Matrix::Identity(A.rows(), A.cols());
  Matrix U = A * (b[9] * A8 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  Matrix V = b[8] * A8 + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  return pade_solve(U, V);
}

Matrix expm_pade13(const Matrix& A, const Matrix& A2, const Matrix& A4,
                   const Matrix& A6) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  Matrix I = Matrix::Identity(A.rows(), A.cols());
  Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
                  b[5] * A4 + b[3] * A2 + b[1] * I);
  Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
             b[4] * A4 + b[2] * A2 + b[0] * I;
  return pade_solve(U, V);
}

}  // namespace

Matrix expm(const Matrix& M, double t) {
  if (M.rows() != M.cols()) throw std::invalid_argument("expm: matrix not square");
  const Eigen::Index n = M.rows();
  if (!M.allFinite() || !std::isfinite(t))
    throw std::invalid_argument("expm: non-finite input");

  Matrix A = M * t;
  double norm = A.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm

  Matrix R;
  if (norm <= kTheta9) {
    Matrix A2 = A * A;
    if (norm <= kTheta3) {
      R = expm_pade3(A, A2);
    } else if (norm <= kTheta5) {
      Matrix A4 = A2 * A2;
      R = expm_pade5(A, A2, A4);
    } else if (norm <= kTheta7) {
      Matrix A4 = A2 * A2;
      Matrix A6 = A4 * A2;
      R = expm_pade7(A, A2, A4, A6);
    } else {
      Matrix A4 = A2 * A2;
      Matrix A6 = A4 * A2;
      Matrix A8 = A6 * A2;
      R = expm_pade9(A, A2, A4, A6, A8);
    }
  } else {
    int s = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    if (s < 0) s = 0;
    if (s > 60) throw std::range_error("expm: argument norm too large");
    A /= std::pow(2.0, s);
    Matrix A2 = A * A;
    Matrix A4 = A2 * A2;
    Matrix A6 = A4 * A2;
    R = expm_pade13(A, A2, A4, A6);
    for (int i = 0; i < s; ++i) R = R * R;
  }

  if (!R.allFinite()) throw std::range_error("expm: overflow in result");
  (void)n;
  return R;
}

Vector expint(const Matrix& A, const Vector& b, double t0, double t1,
              Direction dir) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw std::invalid_argument("expint: dimension mismatch");
  const Eigen::Index n = A.rows();
  const double s = direction_sign(dir);

  // Augment: exp([[sA, b], [0, 0]] * t) has J(t) = int_0^t e^{sA u} b du in
  // the top right column.
  Matrix W = Matrix::Zero(n + 1, n + 1);
  W.topLeftCorner(n, n) = s * A;
  W.topRightCorner(n, 1) = b;

  auto J = [&](double t) -> Vector {
    Matrix E = expm(W, t);
    return E.topRightCorner(n, 1);
  };
  if (t0 == 0.0) return J(t1);
  return J(t1) - J(t0);
}

std::vector<Vector> krylov_chain(const Matrix& A, const Vector& b, int k) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw std::invalid_argument("krylov_chain: dimension mismatch");
  if (k < 1) throw std::invalid_argument("krylov_chain: k must be positive");
  std::vector<Vector> chain;
  chain.reserve(k);
  chain.push_back(b);
  for (int i = 1; i < k; ++i) chain.push_back(A * chain.back());
  return chain;
}

}  // namespace mtf
