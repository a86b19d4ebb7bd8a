#pragma once

#include <complex>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "coe/util.hpp"

namespace coe {

enum class KernelKind { zero, exponential, gaussian, scaled_sum };

/// Convolution kernel on R^d (d = 1 or 2) with a closed-form Fourier
/// transform under the convention  k^(xi) = \int e^{-i t.xi} k(t) dt.
///
/// The catalog is separable in the coordinates:
///   exponential(m):  k(t) = exp(-m * sum_i |t_i|),
///                    k^(xi) = prod_i 2m / (m^2 + xi_i^2)
///   gaussian(s):     k(t) = prod_i exp(-t_i^2 / (2 s^2)),
///                    k^(xi) = prod_i s sqrt(2 pi) exp(-s^2 xi_i^2 / 2)
/// plus the zero kernel and finite linear combinations with complex
/// coefficients.
class Kernel {
 public:
  Kernel();  // zero kernel, d = 1

  static Kernel zero(int dim = 1);
  static Kernel exponential(double decay, int dim = 1);
  static Kernel gaussian(double width, int dim = 1);
  static Kernel scaled_sum(std::vector<std::pair<Complex, Kernel>> terms);

  int dim() const { return dim_; }
  KernelKind kind() const { return kind_; }
  /// True when the kernel is identically zero (zero kernel, empty sum, or a
  /// sum whose coefficients are all zero).
  bool is_zero() const;
  /// Slowest decay rate among the summands; +inf for the zero kernel.
  /// Used to size the periodic box so that tails are negligible.
  double decay_rate() const;

  Complex value(const std::vector<double>& t) const;
  Complex transform(const std::vector<double>& xi) const;
  /// D^alpha of the transform, alpha componentwise in {0,1}.
  Complex transform_derivative(const std::vector<double>& xi,
                               const std::vector<int>& alpha) const;

  // d = 1 conveniences.
  Complex value(double t) const;
  Complex transform(double xi) const;
  Complex transform_derivative(double xi, int order) const;

  const std::vector<std::pair<Complex, Kernel>>& terms() const { return terms_; }
  double parameter() const { return param_; }

 private:
  KernelKind kind_ = KernelKind::zero;
  int dim_ = 1;
  double param_ = 0.0;  // decay rate m or width s
  std::vector<std::pair<Complex, Kernel>> terms_;
};

/// Quadrature of \int_{[-H,H]^d} e^{-i t.xi} k(t) dt, independent of the
/// closed forms above.  Each Simpson panel is integrated against the
/// oscillatory factor exactly, so the error does not degrade with |xi|.
/// `panels` counts panels per axis (2 h per panel).
Complex numeric_transform_oracle(const Kernel& k, const std::vector<double>& xi,
                                 double halfwidth, int panels);
Complex numeric_transform_oracle(const Kernel& k, double xi, double halfwidth,
                                 int panels);

/// Halfwidth H such that the absolute tail mass outside [-H,H]^d stays
/// below tail_tol.
double recommended_halfwidth(const Kernel& k, double tail_tol = 1e-12);

/// Grammar: zero | exp(m=<float>) | gauss(s=<float>)
///        | sum(<coef>*<kernel>, ...)   with <coef> real or (re,im).
Kernel parse_kernel(std::string_view text, int dim = 1);
std::string format_kernel(const Kernel& k);

}  // namespace coe
