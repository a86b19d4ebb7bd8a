#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "coe/conditions.hpp"
#include "coe/grid.hpp"
#include "coe/sectorial.hpp"

namespace coe {

/// Operator-valued symbol on the punctured frequency space.  The zero mode
/// has no formula of its own: `zero_value` carries the limit when it
/// exists, otherwise apply_multiplier projects the mean of the input out.
struct MultiplierSymbol {
  int dim = 1;
  int e_dim = 1;
  std::string name;
  std::function<Eigen::MatrixXcd(const std::array<double, 2>&)> evaluate;
  /// d/dxi_axis; null when no closed form is wired.
  std::function<Eigen::MatrixXcd(const std::array<double, 2>&, int axis)> derivative;
  std::optional<Eigen::MatrixXcd> zero_value;
};

/// Solution symbol of the second-order problem,
///   sigma(xi) = mu(xi) (A + eta(xi))^{-1},
/// with mu = 1/(b1^ + b0), N = sum (c_kj + a_kj^) xi_k xi_j, eta = N mu.
/// The derivative closure expands into the three analytic terms; the zero
/// value mu(0) A^{-1} is present when A is invertible and mu(0) is finite.
/// Evaluation throws a runtime error naming xi when the shifted solve is
/// singular there.
MultiplierSymbol elliptic_symbol(const EllipticCoefficients& coeffs,
                                 const SectorialOperator& A,
                                 std::shared_ptr<ResolventCache> cache = nullptr);

/// The five solution symbols of the first-order-in-time problem, sharing
/// one factorization of (A + eta(xi)) per frequency:
///   m0 = mu (A+eta)^{-1},  m1 = i xi m0,  m2 = a1^ m1,
///   m3 = mu [I - eta (A+eta)^{-1}],  m4 = b1^ m3,
/// with mu = 1/(b1^ + b0) and eta = i xi (a1^ + a0) mu.  They satisfy
/// a0 m1 + m2 + b0 m3 + m4 = I identically.
struct ParabolicSymbols {
  MultiplierSymbol m0, m1, m2, m3, m4;
  std::shared_ptr<ResolventCache> cache;  // null when reuse is off
};
ParabolicSymbols parabolic_symbols(const ParabolicCoefficients& coeffs,
                                   const SectorialOperator& A,
                                   bool reuse_factorizations = true);

/// Symbols of the first-order Cauchy problem and of the second-order
/// problem on the line:
///   m0(tau) = (A + i tau)^{-1},        m1(tau) = i tau (A + i tau)^{-1} - I,
///   sigma0(xi) = (A + xi^2)^{-1},      sigma1 = xi sigma0,
///   sigma2 = xi^2 sigma0,              sigma3 = I - sigma2.
struct CauchySymbols {
  MultiplierSymbol m0, m1;
  MultiplierSymbol sigma0, sigma1, sigma2, sigma3;
  std::shared_ptr<ResolventCache> cache;
};
CauchySymbols cauchy_symbols(const SectorialOperator& A, bool reuse_factorizations = true);

/// T_M f: forward transform, per-frequency matrix product (the zero mode
/// through zero_value or projection), inverse transform.  Deterministic
/// under any thread count.
GridFunction apply_multiplier(const MultiplierSymbol& M, const GridFunction& f);

/// Empirical lower bound for ||T_M||_{L_q -> L_p}: the max ratio over an
/// ensemble of one constant function and seeded band-limited draws
/// (spectral support |k| <= n/4).  Throws GapViolation when the exponent
/// pair is out of range for the dimension.
double estimate_Lq_to_Lp_norm(const MultiplierSymbol& M, double q, double p,
                              const Grid& grid, int ensemble_size, std::uint64_t seed);

/// Weighted derivative sup of a multiplier symbol; wires the analytic
/// derivative closure in when present (mixed second derivatives fall back
/// to differencing the first-derivative closure).
MikhlinReport mikhlin_functional_operator(const MultiplierSymbol& M, double q, double p,
                                          const XiSample& sample,
                                          MikhlinMode mode = MikhlinMode::norm_sup,
                                          std::uint64_t seed = 0);

}  // namespace coe
