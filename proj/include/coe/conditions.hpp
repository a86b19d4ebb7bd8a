#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "coe/kernel.hpp"
#include "coe/util.hpp"

namespace coe {

/// Data of the elliptic operator: constants c_kj, memory kernels a_kj, the
/// zero-order constant b0 and kernel b1.  All kernels share the dimension.
struct EllipticCoefficients {
  int dim = 1;
  Eigen::MatrixXcd c;
  std::vector<std::vector<Kernel>> a;
  Complex b0{0.0, 0.0};
  Kernel b1 = Kernel::zero(1);
};

/// Data of the first-order-in-time problem: u' enters through a0 and the
/// convolution kernel a1, the operator term through b0 and b1.  All kernels
/// are one-dimensional.
struct ParabolicCoefficients {
  Complex a0{0.0, 0.0};
  Kernel a1 = Kernel::zero(1);
  Complex b0{0.0, 0.0};
  Kernel b1 = Kernel::zero(1);
};

/// Frequency sample used by every checker.  Points never include the
/// origin; the second coordinate is unused in dimension one.
struct XiSample {
  int dim = 1;
  std::vector<std::array<double, 2>> points;
};

/// Symmetric log grid, `points_per_decade` per decade and sign over
/// magnitudes [lo, hi].  Dimension two walks `directions` rays instead of
/// two signs.
XiSample log_xi_sample(int dim, double lo, double hi, int points_per_decade,
                       int directions = 64);
/// The sweep the checkers default to: 400 points per decade and sign over
/// [1e-6, 1e6] in dimension one, 64 rays with 60 per decade in dimension two.
XiSample default_xi_sample(int dim);

struct ConditionItem {
  std::string label;
  bool pass = false;
  double measured = 0.0;
  std::array<double, 2> worst_xi{0.0, 0.0};
};

struct ConditionReport {
  std::vector<ConditionItem> items;
  bool overall = false;
  std::map<std::string, double> constants;
  std::string text() const;
  std::string csv() const;
};

struct GapViolation : std::runtime_error {
  GapViolation(double q, double p, int d);
  double q;
  double p;
  int d;
};

struct ConditionFailure : std::runtime_error {
  explicit ConditionFailure(ConditionReport r);
  ConditionReport report;
};

/// True iff 1/q - 1/p <= 2/d.  Requires 1 < q <= p < infinity and d >= 1.
bool check_gap(double q, double p, int d);
/// Throws GapViolation when check_gap fails.
void require_gap(double q, double p, int d);

/// Sweeps the elliptic hypotheses over the sample: the denominator infimum,
/// the ellipticity constant of N(xi), sector membership of the ratio
/// eta = N/(b1^ + b0), and the weighted derivative bounds on a^ and b1^.
/// Failures are report entries, never exceptions.
ConditionReport check_condition_3_1(const EllipticCoefficients& coeffs, double phi,
                                    const XiSample& sample);

/// Sweeps the parabolic hypotheses: tail infimum of |a0 + a1^|, denominator
/// infimum, sector membership of i xi (a1^ + a0)/(b1^ + b0), and the four
/// kernel bounds C0..C3.
ConditionReport check_condition_4_1(const ParabolicCoefficients& coeffs, double phi,
                                    const XiSample& sample, double tail_threshold = 1e3);

/// Scalar symbol with an optional analytic derivative; central differences
/// with step 1e-4 * max(1, |xi|) fill in when the derivative is missing.
/// The alpha argument has one 0/1 entry per axis, not all zero.
struct ScalarSymbol {
  std::function<Complex(const std::array<double, 2>&)> value;
  std::function<Complex(const std::array<double, 2>&, const std::array<int, 2>&)> derivative;
};

/// Matrix-valued counterpart of ScalarSymbol.
struct OperatorSymbolProbe {
  int e_dim = 1;
  std::function<Eigen::MatrixXcd(const std::array<double, 2>&)> value;
  std::function<Eigen::MatrixXcd(const std::array<double, 2>&, const std::array<int, 2>&)>
      derivative;
};

struct MikhlinReport {
  std::map<std::string, double> per_alpha;
  double overall_sup = 0.0;
  double q = 2.0;
  double p = 2.0;
  int dim = 1;
  /// Set when the weighted values keep growing toward either end of the
  /// sample, i.e. the sup is an artifact of the finite sweep.
  bool divergence_flag = false;
  std::string text() const;
};

/// sup over the sample of |xi|^{|alpha| + d(1/q - 1/p)} |D^alpha psi(xi)|
/// for every multi-index alpha with entries in {0, 1}.
MikhlinReport mikhlin_functional_scalar(const ScalarSymbol& psi, double q, double p, int d,
                                        const XiSample& sample);

enum class MikhlinMode { norm_sup, rbound_sample };

/// Operator version.  norm_sup takes the spectral norm pointwise;
/// rbound_sample keeps the <= 64 heaviest frequencies per alpha and runs the
/// randomized bound estimator on that weighted family.
MikhlinReport mikhlin_functional_operator(const OperatorSymbolProbe& M, double q, double p,
                                          int d, const XiSample& sample,
                                          MikhlinMode mode = MikhlinMode::norm_sup,
                                          std::uint64_t seed = 0);

}  // namespace coe
