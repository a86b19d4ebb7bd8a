#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "coe/util.hpp"

namespace coe {

/// Finite family of same-size complex matrices, typically sampled from a
/// frequency-dependent operator curve.  `labels` optionally records the
/// sampling parameters, one per member (or stays empty).
struct OperatorFamily {
  std::vector<Eigen::MatrixXcd> members;
  std::vector<double> labels;
};

enum class SignMode { automatic, exhaustive, sampled };

struct RBoundEstimate {
  double value = 0.0;
  double sup_norm = 0.0;
  double p = 2.0;
  int trials = 0;
  int draw_size = 0;
  std::uint64_t seed = 0;
  bool exhaustive_signs = false;
};

/// Randomized lower estimate of the Rademacher bound of the family: each
/// trial draws members with replacement and unit vectors, then compares the
/// two sign-averaged L_p norms.  The first trials revisit each member with
/// repeated copies of its leading singular vector, so the estimate never
/// falls below the largest member norm.  Signs are enumerated exhaustively
/// for draw sizes up to 12 and sampled (4096 draws) above, unless `mode`
/// forces one path.  Deterministic for a fixed seed.
RBoundEstimate estimate_R_bound(const OperatorFamily& family, double p, int trials,
                                int draw_size, std::uint64_t seed,
                                SignMode mode = SignMode::automatic);

struct KahaneReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double constant = 0.0;
  bool pass = false;
  std::size_t patterns = 0;
};

/// Contraction inequality for sign averages: with |alpha_j| <= |beta_j|,
/// the alpha-weighted average is at most twice the beta-weighted one, and
/// the factor drops to one when every scalar is real.  Exhaustive over all
/// sign patterns; at most 12 terms.
KahaneReport check_kahane(const std::vector<Complex>& alphas, const std::vector<Complex>& betas,
                          const std::vector<Eigen::VectorXcd>& vectors, double p);

struct CalculusReport {
  double r1 = 0.0;
  double r2 = 0.0;
  double r_sum = 0.0;
  double r_product = 0.0;
  bool sum_pass = false;
  bool product_pass = false;
  double slack = 0.0;
};

/// Estimates the bounds of family1, family2, the all-pairs sum family
/// {T + S} and the all-pairs composition family {T S}, then checks
/// subadditivity and submultiplicativity within the given relative slack.
CalculusReport check_calculus_d_e(const OperatorFamily& family1, const OperatorFamily& family2,
                                  double p, int trials, int draw_size, std::uint64_t seed,
                                  double slack = 0.05);

}  // namespace coe
