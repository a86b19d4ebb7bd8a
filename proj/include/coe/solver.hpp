#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coe/multiplier.hpp"

namespace coe {

/// Outcome of one solve.  `derived` holds the companion quantities the
/// equation controls (u', convolution terms, Au, u'') as grid functions;
/// `residual` is the relative defect of the recomposed equation, measured
/// in the grid L_2 norm and computed through a path independent of the
/// solution symbol.
struct Solution {
  GridFunction u;
  std::map<std::string, GridFunction> derived;
  double residual = 0.0;
};

/// The four left-hand-side norms of the first-order problem plus the
/// forcing norm, all in the grid L_p norm used by the solve.  `ratio_C`
/// is their sum over the forcing norm; it is absent when the forcing
/// vanishes.
struct CoerciveReport {
  double norm_u_prime = 0.0;
  double norm_conv_u_prime = 0.0;
  double norm_Au = 0.0;
  double norm_conv_Au = 0.0;
  double norm_f = 0.0;
  std::optional<double> ratio_C;
};

struct EllipticResult {
  Solution solution;
  /// ||u||_p / ||f||_q, zero when f = 0.
  double sobolev_ratio = 0.0;
  ConditionReport condition;
};

/// Solves the second-order equation by inverting its symbol: the state is
/// recovered as u = F^{-1}[sigma f^].  The hypothesis checker runs first
/// and a failing report aborts the solve (ConditionFailure); the exponent
/// pair must satisfy the gap inequality.  Residual: the forward symbol
/// (b1^ + b0) A + N(xi) is reapplied to u and compared against f.
EllipticResult solve_elliptic(const EllipticCoefficients& coeffs, const SectorialOperator& A,
                              const GridFunction& f, double p, double q);

struct ParabolicResult {
  Solution solution;
  CoerciveReport coercive;
  ConditionReport condition;
};

/// Solves the first-order-in-time equation through the m0 multiplier and
/// derives the four controlled terms through m1..m4 (one shared resolvent
/// factorization per frequency).  Requires the hypothesis check to pass
/// and, unless the forcing is mean free, an invertible operator for the
/// zero mode.  `reuse_factorizations = false` disables the per-frequency
/// resolvent store; results are identical, only slower, so the flag exists
/// for timing comparisons.
ParabolicResult solve_parabolic(const ParabolicCoefficients& coeffs, const SectorialOperator& A,
                                const GridFunction& f, double p,
                                bool reuse_factorizations = true);

struct CauchyResult {
  Solution solution;
  /// Quadrature path: the semigroup convolution marched over the doubled
  /// box and restricted back, zeroed on t < 0 like `solution.u`.
  GridFunction semigroup_u;
  /// Relative grid-L_2 distance between the two paths.
  double discrepancy = 0.0;
  /// Pairs (theta, ||u||_theta / ||f||_q) for theta in {q, theta, 2q}.
  std::vector<std::pair<double, double>> theta_ratios;
};

/// Zero-history evolution problem on t >= 0: u' + Au = f with u = 0 for
/// t < 0.  The forcing must vanish on the negative half of the grid and A
/// must be invertible.  The box is doubled internally so the periodic
/// model does not feed the solution tail back into the causal window;
/// both the resolvent-multiplier path and the stepwise semigroup
/// quadrature are computed and compared.
CauchyResult solve_cauchy(const SectorialOperator& A, const GridFunction& f, double q,
                          double theta);

/// Second-order problem on the line, -u'' + Au = f, via the resolvent
/// family at xi^2.  Derived terms u', u'', Au come from the companion
/// symbols; the residual recomposes -u'' + Au from the solution itself
/// (spectral second derivative plus a direct matrix apply).
Solution solve_elliptic_doe(const SectorialOperator& A, const GridFunction& f);

/// Causal convolution with the semigroup: u(t_j) = integral over [start,
/// t_j] of e^{-A(t_j - s)} f(s) ds, marched cell by cell with a 5-point
/// Gauss rule and precomputed step matrices.  The sampled overload reads
/// f between nodes by trigonometric interpolation; the callable overload
/// evaluates it directly.
GridFunction semigroup_convolution(const SectorialOperator& A, const GridFunction& f);
GridFunction semigroup_convolution(const SectorialOperator& A, const Grid& grid, int e_dim,
                                   const std::function<Eigen::VectorXcd(double)>& f);

struct MemberRecord {
  std::uint64_t seed = 0;
  double residual = 0.0;
  double norm_u_prime = 0.0;
  double norm_conv_u_prime = 0.0;
  double norm_Au = 0.0;
  double norm_conv_Au = 0.0;
  double norm_f = 0.0;
  std::optional<double> ratio_C;
};

struct FadingMemoryReport {
  ConditionReport condition;
  std::vector<MemberRecord> members;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  int excluded = 0;
  std::string text() const;
  /// One line per member: member_seed,residual,norm_u_prime,
  /// norm_conv_u_prime,norm_Au,norm_conv_Au,norm_f,ratio_C.
  std::string csv() const;
};

/// Heat conduction with fading memory on (0, pi): exponential kernels
/// exp(m), exp(k) on the derivative and operator terms, Dirichlet
/// Laplacian shifted by c in space.  Runs the hypothesis check, solves an
/// ensemble of seeded band-limited forcings and reports the left-hand
/// side norms in the mixed L_p(time; L_q_spatial(space)) norm.  Members
/// use a fixed band so refining the time grid keeps them unchanged.
FadingMemoryReport demo_fading_memory(double m, double k, double c, const Grid& grid_t,
                                      int n_x, double p, double q_spatial,
                                      int ensemble_size = 50, std::uint64_t seed = 1,
                                      bool reuse_factorizations = true);

struct DiffusionReport {
  int truncation = 1;
  Solution solution;
  double discrepancy = 0.0;
  double norm_u = 0.0;
  double norm_f = 0.0;
  std::optional<double> ratio;
  std::vector<double> component_norms;
  std::string text() const;
  std::string csv() const;
};

/// Truncation of the countable diffusion system: K copies of the shifted
/// Dirichlet Laplacian in block-diagonal form, solved as one Cauchy
/// problem.  Norms are mixed with the flat inner exponent p_inner so the
/// product structure of the state space is visible in the reports.  A
/// missing forcing is replaced by a seeded smooth causal default.
DiffusionReport demo_diffusion_system(int K, double c, const Grid& grid_t, int n_x,
                                      double p_inner, double q,
                                      std::optional<GridFunction> forcing = std::nullopt,
                                      std::uint64_t seed = 1);

struct SobolevReport {
  double base_ratio = 0.0;
  double grid_refined_ratio = 0.0;
  double box_refined_ratio = 0.0;
  /// Largest relative change of the measured constant under the two
  /// refinements.
  double drift = 0.0;
  bool stable = false;
  std::string text() const;
};

/// Measures the constant of the two-exponent estimate ||u||_p <=
/// C ||Lu||_q on an ensemble of localized smooth states: each member is a
/// grid-independent sum of Gaussian wave packets, f = Lu* is formed with
/// the forward symbol and the reported constant is the worst ratio.  The
/// study repeats on a grid with doubled resolution and on a doubled box
/// (same spacing) and flags stability when the constant moves less than
/// five percent.
SobolevReport verify_sobolev(const EllipticCoefficients& coeffs, const SectorialOperator& A,
                             double q, double p, int ensemble_size, std::uint64_t seed,
                             const Grid& grid);

struct GrowthReport {
  /// Pairs (T, sup over |t| <= T of |t|^{1 + 1/q - 1/theta} ||(A + it)^{-1}||).
  std::vector<std::pair<double, double>> table;
  /// Least-squares slope of log10(sup) against log10(T).
  double slope = 0.0;
  std::string text() const;
};

/// Growth functional behind the failure of the derivative estimate when
/// the exponents differ: the weighted resolvent sup grows like
/// T^{1/q - 1/theta}, so the fitted slope separates q = theta (bounded)
/// from q < theta (unbounded).
GrowthReport negative_test_m1(const SectorialOperator& A, double q, double theta,
                              const std::vector<double>& T_list);

}  // namespace coe
