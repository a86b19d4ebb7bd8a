#include "coe/rbound.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "coe/sectorial.hpp"

namespace coe {

namespace {

// Exponent helpers kept free of std::pow on the common exponents so that
// exactly scaled inputs produce exactly scaled outputs.
double p_pow(double t, double p) {
  if (p == 1.0) return t;
  if (p == 2.0) return t * t;
  if (p == 4.0) {
    double s = t * t;
    return s * s;
  }
  return std::pow(t, p);
}

double p_root(double m, double p) {
  if (p == 1.0) return m;
  if (p == 2.0) return std::sqrt(m);
  if (p == 4.0) return std::sqrt(std::sqrt(m));
  return std::pow(m, 1.0 / p);
}

double unit_open(std::mt19937_64& rng) {
  for (;;) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

Complex complex_gaussian(std::mt19937_64& rng) {
  double u1 = unit_open(rng);
  double u2 = unit_open(rng);
  double r = std::sqrt(-2.0 * std::log(u1));
  double t = 6.283185307179586 * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

Eigen::VectorXcd random_unit_vector(std::mt19937_64& rng, int dim) {
  for (;;) {
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = complex_gaussian(rng);
    double n = v.norm();
    if (n > 0.0) return v / n;
  }
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t size) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / size * size;
  for (;;) {
    std::uint64_t v = rng();
    if (v < limit) return static_cast<std::size_t>(v % size);
  }
}

struct MeanPair {
  double num = 0.0;
  double den = 0.0;
};

// Means of ||sum_j e_j num_j||^p and ||sum_j e_j den_j||^p over all sign
// patterns, walked in Gray-code order so each step updates one term.
MeanPair sign_means_exhaustive(const std::vector<Eigen::VectorXcd>& num,
                               const std::vector<Eigen::VectorXcd>& den, double p) {
  const int n = static_cast<int>(num.size());
  Eigen::VectorXcd sn = Eigen::VectorXcd::Zero(num[0].size());
  Eigen::VectorXcd sd = Eigen::VectorXcd::Zero(den[0].size());
  for (int j = 0; j < n; ++j) {
    sn += num[j];
    sd += den[j];
  }
  std::vector<double> sign(n, 1.0);
  MeanPair acc;
  acc.num = p_pow(sn.norm(), p);
  acc.den = p_pow(sd.norm(), p);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    int j = std::countr_zero(k);
    double step = -2.0 * sign[j];
    sn += step * num[j];
    sd += step * den[j];
    sign[j] = -sign[j];
    acc.num += p_pow(sn.norm(), p);
    acc.den += p_pow(sd.norm(), p);
  }
  acc.num /= static_cast<double>(total);
  acc.den /= static_cast<double>(total);
  return acc;
}

MeanPair sign_means_sampled(const std::vector<Eigen::VectorXcd>& num,
                            const std::vector<Eigen::VectorXcd>& den, double p,
                            std::mt19937_64& rng) {
  constexpr int kDraws = 4096;
  const int n = static_cast<int>(num.size());
  MeanPair acc;
  Eigen::VectorXcd sn(num[0].size());
  Eigen::VectorXcd sd(den[0].size());
  for (int d = 0; d < kDraws; ++d) {
    sn.setZero();
    sd.setZero();
    std::uint64_t bits = 0;
    int have = 0;
    for (int j = 0; j < n; ++j) {
      if (have == 0) {
        bits = rng();
        have = 64;
      }
      double s = (bits & 1u) ? 1.0 : -1.0;
      bits >>= 1;
      --have;
      sn += s * num[j];
      sd += s * den[j];
    }
    acc.num += p_pow(sn.norm(), p);
    acc.den += p_pow(sd.norm(), p);
  }
  acc.num /= kDraws;
  acc.den /= kDraws;
  return acc;
}

double means_to_ratio(const MeanPair& m, double p) {
  if (m.den == 0.0) return 0.0;
  return p_root(m.num, p) / p_root(m.den, p);
}

void validate_family(const OperatorFamily& family) {
  if (family.members.empty()) throw std::invalid_argument("operator family is empty");
  const auto rows = family.members[0].rows();
  for (const auto& m : family.members) {
    if (m.rows() != m.cols() || m.rows() != rows)
      throw std::invalid_argument("operator family members must be square and same size");
  }
  if (!family.labels.empty() && family.labels.size() != family.members.size())
    throw std::invalid_argument("family labels must be empty or one per member");
}

}  // namespace

RBoundEstimate estimate_R_bound(const OperatorFamily& family, double p, int trials,
                                int draw_size, std::uint64_t seed, SignMode mode) {
  validate_family(family);
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent must be >= 1");
  if (trials < 100) throw std::invalid_argument("need at least 100 trials");
  const std::size_t count = family.members.size();
  if (draw_size < 1 || static_cast<std::size_t>(draw_size) > 4 * count)
    throw std::invalid_argument("draw size must lie in [1, 4 * family size]");
  if (mode == SignMode::exhaustive && draw_size > 12)
    throw std::invalid_argument("exhaustive sign enumeration needs draw size <= 12");
  const bool exhaustive =
      mode == SignMode::exhaustive || (mode == SignMode::automatic && draw_size <= 12);

  RBoundEstimate est;
  est.p = p;
  est.trials = trials;
  est.draw_size = draw_size;
  est.seed = seed;
  est.exhaustive_signs = exhaustive;
  for (const auto& m : family.members)
    est.sup_norm = std::max(est.sup_norm, operator_norm_2(m));

  const std::size_t witness = std::min(count, static_cast<std::size_t>(trials));
  const int dim = static_cast<int>(family.members[0].rows());
  std::vector<double> ratios(trials, 0.0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    std::vector<Eigen::VectorXcd> num(draw_size), den(draw_size);
    if (t < witness) {
      const Eigen::MatrixXcd& T = family.members[t];
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(T, Eigen::ComputeThinV);
      Eigen::VectorXcd x = svd.matrixV().col(0);
      Eigen::VectorXcd Tx = T * x;
      for (int j = 0; j < draw_size; ++j) {
        num[j] = Tx;
        den[j] = x;
      }
    } else {
      for (int j = 0; j < draw_size; ++j) {
        std::size_t idx = uniform_index(rng, count);
        Eigen::VectorXcd x = random_unit_vector(rng, dim);
        num[j] = family.members[idx] * x;
        den[j] = std::move(x);
      }
    }
    MeanPair means = exhaustive ? sign_means_exhaustive(num, den, p)
                                : sign_means_sampled(num, den, p, rng);
    ratios[t] = means_to_ratio(means, p);
  });
  for (double r : ratios) est.value = std::max(est.value, r);
  return est;
}

KahaneReport check_kahane(const std::vector<Complex>& alphas, const std::vector<Complex>& betas,
                          const std::vector<Eigen::VectorXcd>& vectors, double p) {
  const std::size_t n = alphas.size();
  if (n == 0 || betas.size() != n || vectors.size() != n)
    throw std::invalid_argument("scalar and vector lists must be nonempty and equal length");
  if (n > 12) throw std::invalid_argument("exhaustive sign enumeration needs at most 12 terms");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent must be >= 1");
  const auto dim = vectors[0].size();
  bool all_real = true;
  for (std::size_t j = 0; j < n; ++j) {
    if (vectors[j].size() != dim) throw std::invalid_argument("vectors must share a dimension");
    if (std::abs(alphas[j]) > std::abs(betas[j]) + 1e-12 * (1.0 + std::abs(betas[j])))
      throw std::invalid_argument("scalar domination |alpha_j| <= |beta_j| violated");
    if (alphas[j].imag() != 0.0 || betas[j].imag() != 0.0) all_real = false;
  }

  std::vector<Eigen::VectorXcd> weighted_a(n), weighted_b(n);
  for (std::size_t j = 0; j < n; ++j) {
    weighted_a[j] = alphas[j] * vectors[j];
    weighted_b[j] = betas[j] * vectors[j];
  }
  MeanPair means = sign_means_exhaustive(weighted_a, weighted_b, p);

  KahaneReport rep;
  rep.lhs = p_root(means.num, p);
  rep.rhs = p_root(means.den, p);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  rep.constant = all_real ? 1.0 : 2.0;
  rep.pass = rep.lhs <= rep.constant * rep.rhs + 1e-12 * (1.0 + rep.rhs);
  rep.patterns = std::size_t{1} << n;
  return rep;
}

CalculusReport check_calculus_d_e(const OperatorFamily& family1, const OperatorFamily& family2,
                                  double p, int trials, int draw_size, std::uint64_t seed,
                                  double slack) {
  validate_family(family1);
  validate_family(family2);
  if (family1.members[0].rows() != family2.members[0].rows())
    throw std::invalid_argument("families must act on the same space");
  if (family1.members.size() * family2.members.size() > 10000)
    throw std::invalid_argument("pair families would be too large");

  OperatorFamily sum, product;
  for (const auto& T : family1.members) {
    for (const auto& S : family2.members) {
      sum.members.push_back(T + S);
      product.members.push_back(T * S);
    }
  }

  CalculusReport rep;
  rep.slack = slack;
  rep.r1 = estimate_R_bound(family1, p, trials, draw_size, derive_seed(seed, 101)).value;
  rep.r2 = estimate_R_bound(family2, p, trials, draw_size, derive_seed(seed, 102)).value;
  rep.r_sum = estimate_R_bound(sum, p, trials, draw_size, derive_seed(seed, 103)).value;
  rep.r_product = estimate_R_bound(product, p, trials, draw_size, derive_seed(seed, 104)).value;
  rep.sum_pass = rep.r_sum <= (rep.r1 + rep.r2) * (1.0 + slack) + 1e-12;
  rep.product_pass = rep.r_product <= rep.r1 * rep.r2 * (1.0 + slack) + 1e-12;
  return rep;
}

}  // namespace coe
