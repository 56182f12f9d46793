#pragma once

#include <complex>

namespace unravel {

using Complex = std::complex<double>;

/// Decay rate and Rabi frequency of a resonantly driven two-level atom.
class AtomParams {
public:
  /// Throws std::invalid_argument unless gamma > 0 and omega >= 0.
  AtomParams(double gamma, double omega);

  double gamma() const { return gamma_; }
  double omega() const { return omega_; }

private:
  double gamma_;
  double omega_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double dot(const BlochVector& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;

  BlochVector& operator+=(const BlochVector& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  friend BlochVector operator+(BlochVector a, const BlochVector& b) { return a += b; }
  friend BlochVector operator-(const BlochVector& a, const BlochVector& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend BlochVector operator*(double s, const BlochVector& b) { return {s * b.x, s * b.y, s * b.z}; }
};

/// Tolerance on Bloch-vector norms.
inline constexpr double kBlochNormTolerance = 1e-9;

/// Two amplitudes in the {|g>, |e>} basis; normalization depends on context.
struct PureState {
  Complex cg{1.0, 0.0};
  Complex ce{0.0, 0.0};

  double norm2() const { return std::norm(cg) + std::norm(ce); }
  /// Throws std::domain_error for a zero vector.
  PureState normalized() const;
  /// Bloch image (<sx>, <sy>, <sz>) of the normalized state.
  BlochVector bloch() const;

  /// A state whose Bloch vector is b (|b| is normalized to 1 first).
  static PureState from_bloch(const BlochVector& b);
  static PureState ground() { return {}; }
  static PureState excited() { return {Complex{0.0}, Complex{1.0}}; }
};

/// Constants of the analytic Bloch solution
///   y(t) = c+ e^{l+ t} + c- e^{l- t} + y_ss,
///   z(t) = c+ (g - 4i W)/(4 O) e^{l+ t} + c- (g + 4i W)/(4 O) e^{l- t} + z_ss,
/// with W the modified Rabi frequency sqrt(O^2 - (g/4)^2).
struct BlochSolutionCoefficients {
  Complex c_plus;
  Complex c_minus;
  Complex lambda_plus;
  Complex lambda_minus;
  Complex omega_tilde;
};

/// sqrt(omega^2 - (gamma/4)^2); purely imaginary below omega = gamma/4.
Complex omega_tilde(const AtomParams& p);

/// sin(a t) / a, finite as a -> 0 (Taylor expansion for |a t| < 1e-4).
Complex sin_over(Complex a, double t);

BlochVector steady_state(const AtomParams& p);

/// Bloch equations of the resonance fluorescence master equation:
///   dx/dt = -g x / 2,  dy/dt = -g y / 2 - O z,  dz/dt = O y - g (1 + z).
BlochVector me_rhs(const AtomParams& p, const BlochVector& b);

/// Exact propagation of b0 for a time t >= 0 (throws std::invalid_argument for t < 0).
BlochVector bloch_evolve(const AtomParams& p, const BlochVector& b0, double t);

/// Tr[rho^2] = (1 + |b|^2) / 2.
double purity(const BlochVector& b);

/// Literal c+-, l+- of the analytic solution for initial (v, w) = (b0.y, b0.z).
/// Requires omega > 0 and omega != gamma/4 (the form is singular there);
/// throws std::domain_error otherwise.
BlochSolutionCoefficients solution_coefficients(const AtomParams& p, const BlochVector& b0);

/// Evaluates y(t), z(t) from the coefficients; x is u e^{-g t / 2}.
BlochVector evaluate_solution(const AtomParams& p, const BlochSolutionCoefficients& c, double u,
                              double t);

}  // namespace unravel
