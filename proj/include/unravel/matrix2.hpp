#pragma once

#include <array>
#include <complex>

namespace unravel {

/// Row-major 2x2 complex matrix.
using Matrix2 = std::array<std::complex<double>, 4>;

inline Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

/// exp(m t) = e^{tr t/2} [cosh(s t) + sinh(s t)/s (m - tr/2)] with
/// s^2 = ((m00 - m11)/2)^2 + m01 m10.
inline Matrix2 expm(const Matrix2& m, double t) {
  using C = std::complex<double>;
  const C half_tr = 0.5 * (m[0] + m[3]);
  const C a = m[0] - half_tr;
  const C d = m[3] - half_tr;
  const C s = std::sqrt(a * a + m[1] * m[2]);
  const C st = s * t;
  const C ch = std::cosh(st);
  C sh_over;
  if (std::abs(st) < 1e-4) {
    sh_over = t * (1.0 + st * st / 6.0);
  } else {
    sh_over = std::sinh(st) / s;
  }
  const C e = std::exp(half_tr * t);
  return {e * (ch + sh_over * a), e * sh_over * m[1], e * sh_over * m[2], e * (ch + sh_over * d)};
}

}  // namespace unravel
