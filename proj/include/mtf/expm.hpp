#pragma once

#include "mtf/types.hpp"

namespace mtf {

// Matrix exponential e^{M t} by scaling and squaring with a degree 13 Pade
// approximant (lower degrees for small norms).  Throws std::range_error if
// the scaled norm is too large to square back reliably or the result
// overflows to non-finite entries.
Matrix expm(const Matrix& M, double t = 1.0);

// Integral of the matrix exponential applied to a vector:
//
//   expint(A, b, t0, t1, dir) = \int_{t0}^{t1} e^{s A s'} b ds,
//
// where s' = +1 for Direction::Forward and -1 for Direction::Reversed.
// Computed through the exponential of the augmented block matrix
// [[S, b], [0, 0]], so it inherits expm's accuracy and needs no quadrature.
Vector expint(const Matrix& A, const Vector& b, double t0, double t1,
              Direction dir = Direction::Reversed);

// First k vectors b, Ab, ..., A^{k-1} b.
std::vector<Vector> krylov_chain(const Matrix& A, const Vector& b, int k);

}  // namespace mtf
