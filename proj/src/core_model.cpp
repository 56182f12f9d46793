#include "unravel/core_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace unravel {

AtomParams::AtomParams(double gamma, double omega) : gamma_(gamma), omega_(omega) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gamma must be positive and finite, got " + std::to_string(gamma));
  }
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("omega must be non-negative and finite, got " +
                                std::to_string(omega));
  }
}

double BlochVector::norm() const { return std::sqrt(dot(*this)); }

PureState PureState::normalized() const {
  const double n = std::sqrt(norm2());
  if (!(n > 0.0)) throw std::domain_error("cannot normalize a zero state vector");
  return {cg / n, ce / n};
}

BlochVector PureState::bloch() const {
  const double n2 = norm2();
  const Complex coh = std::conj(ce) * cg;
  return {2.0 * coh.real() / n2, 2.0 * coh.imag() / n2, (std::norm(ce) - std::norm(cg)) / n2};
}

PureState PureState::from_bloch(const BlochVector& b) {
  const double n = b.norm();
  if (!(n > 0.0)) throw std::domain_error("zero Bloch vector has no pure state");
  const BlochVector u = (1.0 / n) * b;
  // conj(ce) * cg = (x + i y) / 2; pick the larger amplitude real.
  if (u.z >= 0.0) {
    const double ce = std::sqrt((1.0 + u.z) / 2.0);
    return {Complex{u.x, u.y} / (2.0 * ce), Complex{ce, 0.0}};
  }
  const double cg = std::sqrt((1.0 - u.z) / 2.0);
  return {Complex{cg, 0.0}, Complex{u.x, -u.y} / (2.0 * cg)};
}

Complex omega_tilde(const AtomParams& p) {
  const double q = p.gamma() / 4.0;
  return std::sqrt(Complex{p.omega() * p.omega() - q * q, 0.0});
}

Complex sin_over(Complex a, double t) {
  const Complex at = a * t;
  if (std::abs(at) < 1e-4) {
    const Complex at2 = at * at;
    return t * (1.0 - at2 / 6.0 + at2 * at2 / 120.0);
  }
  return std::sin(at) / a;
}

BlochVector steady_state(const AtomParams& p) {
  const double g = p.gamma();
  const double o = p.omega();
  const double den = g * g + 2.0 * o * o;
  return {0.0, 2.0 * g * o / den, -g * g / den};
}

BlochVector me_rhs(const AtomParams& p, const BlochVector& b) {
  const double g = p.gamma();
  const double o = p.omega();
  return {-0.5 * g * b.x, -0.5 * g * b.y - o * b.z, o * b.y - g * (1.0 + b.z)};
}

BlochVector bloch_evolve(const AtomParams& p, const BlochVector& b0, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("bloch_evolve: t must be >= 0");
  if (t == 0.0) return b0;
  const double g = p.gamma();
  const double o = p.omega();
  const BlochVector ss = steady_state(p);
  const double dv = b0.y - ss.y;
  const double dw = b0.z - ss.z;

  // (y, z) block A = [[-g/2, -o], [o, -g]]; with B = A + 3g/4, B^2 = -W^2, so
  // exp(A t) = e^{-3gt/4} [cos(W t) + sin(W t)/W * B].
  const Complex w = omega_tilde(p);
  const Complex c = std::cos(w * t);
  const Complex s = sin_over(w, t);
  const double damp = std::exp(-0.75 * g * t);
  const Complex ey = damp * (c * dv + s * (0.25 * g * dv - o * dw));
  const Complex ez = damp * (c * dw + s * (o * dv - 0.25 * g * dw));
  return {b0.x * std::exp(-0.5 * g * t), ey.real() + ss.y, ez.real() + ss.z};
}

double purity(const BlochVector& b) { return 0.5 * (1.0 + b.dot(b)); }

BlochSolutionCoefficients solution_coefficients(const AtomParams& p, const BlochVector& b0) {
  const double g = p.gamma();
  const double o = p.omega();
  if (!(o > 0.0)) throw std::domain_error("solution_coefficients: requires omega > 0");
  const Complex w = omega_tilde(p);
  if (std::abs(w) < 1e-12 * g) {
    throw std::domain_error("solution_coefficients: degenerate at omega = gamma/4");
  }
  const BlochVector ss = steady_state(p);
  const double dv = b0.y - ss.y;
  const double dw = b0.z - ss.z;
  const Complex i{0.0, 1.0};
  const Complex pre = 1.0 / (8.0 * i * w);
  BlochSolutionCoefficients c;
  c.omega_tilde = w;
  c.c_plus = pre * (-4.0 * o * dw + (g + 4.0 * i * w) * dv);
  c.c_minus = pre * (4.0 * o * dw - (g - 4.0 * i * w) * dv);
  c.lambda_plus = -0.75 * g + i * w;
  c.lambda_minus = -0.75 * g - i * w;
  return c;
}

BlochVector evaluate_solution(const AtomParams& p, const BlochSolutionCoefficients& c, double u,
                              double t) {
  const double g = p.gamma();
  const double o = p.omega();
  const BlochVector ss = steady_state(p);
  const Complex i{0.0, 1.0};
  const Complex ep = std::exp(c.lambda_plus * t);
  const Complex em = std::exp(c.lambda_minus * t);
  const Complex y = c.c_plus * ep + c.c_minus * em;
  const Complex z = c.c_plus * (g - 4.0 * i * c.omega_tilde) / (4.0 * o) * ep +
                    c.c_minus * (g + 4.0 * i * c.omega_tilde) / (4.0 * o) * em;
  return {u * std::exp(-0.5 * g * t), y.real() + ss.y, z.real() + ss.z};
}

}  // namespace unravel
