#include "coe/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "coe/rbound.hpp"
#include "coe/sectorial.hpp"

namespace coe {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInfimumFloor = 1e-6;
constexpr double kSectorTol = 1e-10;

std::vector<double> line_magnitudes(double lo, double hi, int per_decade) {
  std::vector<double> out;
  for (int k = 0;; ++k) {
    double v = lo * std::pow(10.0, static_cast<double>(k) / per_decade);
    if (v > hi * (1.0 + 1e-12)) break;
    out.push_back(v);
  }
  return out;
}

double radius_of(const std::array<double, 2>& pt, int dim) {
  return dim == 1 ? std::abs(pt[0]) : std::hypot(pt[0], pt[1]);
}

std::vector<double> as_vector(const std::array<double, 2>& pt, int dim) {
  return std::vector<double>(pt.begin(), pt.begin() + dim);
}

std::vector<std::array<int, 2>> all_multi_indices(int dim) {
  if (dim == 1) return {{0, 0}, {1, 0}};
  return {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
}

int order_of(const std::array<int, 2>& alpha, int dim) {
  return dim == 1 ? alpha[0] : alpha[0] + alpha[1];
}

std::string alpha_key(const std::array<int, 2>& alpha, int dim) {
  std::string key = std::to_string(alpha[0]);
  if (dim == 2) key += std::to_string(alpha[1]);
  return key;
}

struct Extremum {
  double value = 0.0;
  std::size_t index = 0;
};

Extremum minimum_of(const std::vector<double>& v) {
  Extremum e{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < e.value) e = {v[i], i};
  }
  return e;
}

Extremum maximum_of(const std::vector<double>& v) {
  Extremum e{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > e.value) e = {v[i], i};
  }
  return e;
}

void validate_sample(const XiSample& sample, int dim) {
  if (sample.dim != dim) throw std::invalid_argument("sample dimension mismatch");
  if (sample.points.empty()) throw std::invalid_argument("frequency sample is empty");
}

void validate_phi(double phi) {
  if (!(phi >= 0.0) || phi >= kPi) throw std::invalid_argument("sector angle must lie in [0, pi)");
}

// True when the weighted values keep climbing toward either end of the
// radial range, so the recorded sup is an artifact of the finite sweep.
bool trend_diverges(const std::vector<double>& log_r, const std::vector<double>& value) {
  double lo = *std::min_element(log_r.begin(), log_r.end());
  double hi = *std::max_element(log_r.begin(), log_r.end());
  double span = hi - lo;
  if (span <= 0.0) return false;
  double top_cut = hi - 0.1 * span;
  double bottom_cut = lo + 0.1 * span;
  double sup_top = 0.0, sup_bottom = 0.0, sup_mid_low = 0.0, sup_mid_high = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (log_r[i] >= top_cut) {
      sup_top = std::max(sup_top, value[i]);
    } else {
      sup_mid_low = std::max(sup_mid_low, value[i]);
    }
    if (log_r[i] <= bottom_cut) {
      sup_bottom = std::max(sup_bottom, value[i]);
    } else {
      sup_mid_high = std::max(sup_mid_high, value[i]);
    }
  }
  if (sup_mid_low > 0.0 && sup_top > 1.5 * sup_mid_low) return true;
  if (sup_mid_high > 0.0 && sup_bottom > 1.5 * sup_mid_high) return true;
  return false;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string xi_text(const std::array<double, 2>& xi, int dim) {
  if (dim == 1) return format_double(xi[0]);
  return "(" + format_double(xi[0]) + ", " + format_double(xi[1]) + ")";
}

}  // namespace

XiSample log_xi_sample(int dim, double lo, double hi, int points_per_decade, int directions) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("sample dimension must be 1 or 2");
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 < lo < hi");
  if (points_per_decade < 1) throw std::invalid_argument("need at least one point per decade");
  if (dim == 2 && directions < 4) throw std::invalid_argument("need at least 4 directions");
  XiSample sample;
  sample.dim = dim;
  auto mags = line_magnitudes(lo, hi, points_per_decade);
  if (dim == 1) {
    for (int sign : {1, -1}) {
      for (double r : mags) sample.points.push_back({sign * r, 0.0});
    }
  } else {
    for (int i = 0; i < directions; ++i) {
      double theta = 2.0 * kPi * i / directions;
      double c = std::cos(theta), s = std::sin(theta);
      for (double r : mags) sample.points.push_back({r * c, r * s});
    }
  }
  return sample;
}

XiSample default_xi_sample(int dim) {
  if (dim == 1) return log_xi_sample(1, 1e-6, 1e6, 400);
  return log_xi_sample(2, 1e-6, 1e6, 60, 64);
}

GapViolation::GapViolation(double q_, double p_, int d_)
    : std::runtime_error("exponent gap 1/q - 1/p = " + format_double(1.0 / q_ - 1.0 / p_) +
                         " exceeds 2/d = " + format_double(2.0 / d_) + " for q = " +
                         format_double(q_) + ", p = " + format_double(p_) + ", d = " +
                         std::to_string(d_)),
      q(q_),
      p(p_),
      d(d_) {}

namespace {
std::string failing_labels(const ConditionReport& r) {
  std::string out;
  for (const auto& item : r.items) {
    if (item.pass) continue;
    if (!out.empty()) out += "; ";
    out += item.label;
  }
  return out.empty() ? "unknown item" : out;
}
}  // namespace

ConditionFailure::ConditionFailure(ConditionReport r)
    : std::runtime_error("hypothesis check failed: " + failing_labels(r)), report(std::move(r)) {}

bool check_gap(double q, double p, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  if (!(q > 1.0) || !(p >= q) || !std::isfinite(q) || !std::isfinite(p))
    throw std::invalid_argument("exponents must satisfy 1 < q <= p < infinity");
  return 1.0 / q - 1.0 / p <= 2.0 / d;
}

void require_gap(double q, double p, int d) {
  if (!check_gap(q, p, d)) throw GapViolation(q, p, d);
}

std::string ConditionReport::text() const {
  std::size_t width = 0;
  for (const auto& item : items) width = std::max(width, item.label.size());
  std::ostringstream out;
  for (const auto& item : items) {
    out << item.label << std::string(width - item.label.size(), ' ') << "  "
        << (item.pass ? "pass" : "FAIL") << "  " << format_double(item.measured)
        << "  at xi = " << xi_text(item.worst_xi, item.worst_xi[1] == 0.0 ? 1 : 2) << "\n";
  }
  out << "overall: " << (overall ? "pass" : "FAIL") << "\n";
  for (const auto& [name, value] : constants) {
    out << name << " = " << format_double(value) << "\n";
  }
  return out.str();
}

std::string ConditionReport::csv() const {
  std::ostringstream out;
  out << "item,pass,constant,worst_xi_1,worst_xi_2\n";
  for (const auto& item : items) {
    out << item.label << "," << yes_no(item.pass) << "," << format_double(item.measured) << ","
        << format_double(item.worst_xi[0]) << "," << format_double(item.worst_xi[1]) << "\n";
  }
  return out.str();
}

ConditionReport check_condition_3_1(const EllipticCoefficients& coeffs, double phi,
                                    const XiSample& sample) {
  const int d = coeffs.dim;
  if (d != 1 && d != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (coeffs.c.rows() != d || coeffs.c.cols() != d)
    throw std::invalid_argument("constant matrix must be d x d");
  if (coeffs.a.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("kernel array must be d x d");
  for (const auto& row : coeffs.a) {
    if (row.size() != static_cast<std::size_t>(d))
      throw std::invalid_argument("kernel array must be d x d");
    for (const auto& kern : row) {
      if (kern.dim() != d) throw std::invalid_argument("kernel dimension mismatch");
    }
  }
  if (coeffs.b1.dim() != d) throw std::invalid_argument("kernel dimension mismatch");
  validate_phi(phi);
  validate_sample(sample, d);

  const std::size_t P = sample.points.size();
  const auto betas = all_multi_indices(d);
  std::vector<double> den(P), ell(P), arg_eta(P), sup_a(P), sup_b(P);
  parallel_for_guarded(P, [&](std::size_t i) {
    const auto& pt = sample.points[i];
    auto xi = as_vector(pt, d);
    double r = radius_of(pt, d);
    Complex bh = coeffs.b1.transform(xi) + coeffs.b0;
    den[i] = std::abs(bh);
    Complex N{0.0, 0.0};
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      r2 += xi[k] * xi[k];
      for (int j = 0; j < d; ++j) {
        N += (coeffs.c(k, j) + coeffs.a[k][j].transform(xi)) * (xi[k] * xi[j]);
      }
    }
    ell[i] = std::abs(N) / r2;
    arg_eta[i] = den[i] == 0.0 ? std::numeric_limits<double>::infinity()
                               : std::abs(std::arg(N / bh));
    double sa = 0.0, sb = 0.0;
    for (const auto& beta : betas) {
      double w = std::pow(r, static_cast<double>(order_of(beta, d)));
      std::vector<int> bv(beta.begin(), beta.begin() + d);
      for (int k = 0; k < d; ++k) {
        for (int j = 0; j < d; ++j) {
          sa = std::max(sa, w * std::abs(coeffs.a[k][j].transform_derivative(xi, bv)));
        }
      }
      sb = std::max(sb, w * std::abs(coeffs.b1.transform_derivative(xi, bv)));
    }
    sup_a[i] = sa;
    sup_b[i] = sb;
  });

  ConditionReport rep;
  auto denom = minimum_of(den);
  rep.items.push_back({"(1) denominator infimum |b0 + b1^|", denom.value > kInfimumFloor,
                       denom.value, sample.points[denom.index]});
  auto ellip = minimum_of(ell);
  rep.items.push_back({"(2) ellipticity |N(xi)| / |xi|^2", ellip.value > kInfimumFloor,
                       ellip.value, sample.points[ellip.index]});
  auto sector = maximum_of(arg_eta);
  rep.items.push_back({"(3) symbol ratio eta(xi) in sector", sector.value <= phi + kSectorTol,
                       sector.value, sample.points[sector.index]});
  auto c0 = maximum_of(sup_a);
  rep.items.push_back({"(4) weighted derivative bound C0 on a^", std::isfinite(c0.value),
                       c0.value, sample.points[c0.index]});
  auto c1 = maximum_of(sup_b);
  rep.items.push_back({"(4) weighted derivative bound C1 on b1^", std::isfinite(c1.value),
                       c1.value, sample.points[c1.index]});
  rep.constants["C_b"] = denom.value;
  rep.constants["C"] = ellip.value;
  rep.constants["C0"] = c0.value;
  rep.constants["C1"] = c1.value;
  rep.overall = true;
  for (const auto& item : rep.items) rep.overall = rep.overall && item.pass;
  return rep;
}

ConditionReport check_condition_4_1(const ParabolicCoefficients& coeffs, double phi,
                                    const XiSample& sample, double tail_threshold) {
  if (coeffs.a1.dim() != 1 || coeffs.b1.dim() != 1)
    throw std::invalid_argument("kernels must be one-dimensional");
  validate_phi(phi);
  validate_sample(sample, 1);
  if (!(tail_threshold > 0.0)) throw std::invalid_argument("tail threshold must be positive");

  const std::size_t P = sample.points.size();
  std::vector<double> num_abs(P), den_abs(P), arg_zeta(P), b0v(P), b1v(P), b2v(P), b3v(P);
  parallel_for_guarded(P, [&](std::size_t i) {
    double xi = sample.points[i][0];
    Complex ah = coeffs.a1.transform(xi);
    Complex bh = coeffs.b1.transform(xi);
    Complex num = Complex(0.0, xi) * (coeffs.a0 + ah);
    Complex denom = coeffs.b0 + bh;
    num_abs[i] = std::abs(coeffs.a0 + ah);
    den_abs[i] = std::abs(denom);
    arg_zeta[i] = den_abs[i] == 0.0 ? std::numeric_limits<double>::infinity()
                                    : std::abs(std::arg(num / denom));
    b0v[i] = std::abs(ah);
    b1v[i] = std::abs(xi * coeffs.a1.transform_derivative(xi, 1));
    b2v[i] = std::abs(bh);
    b3v[i] = std::abs(xi * coeffs.b1.transform_derivative(xi, 1));
  });

  double tail_min = std::numeric_limits<double>::infinity();
  std::size_t tail_idx = P;
  for (std::size_t i = 0; i < P; ++i) {
    if (std::abs(sample.points[i][0]) >= tail_threshold && num_abs[i] < tail_min) {
      tail_min = num_abs[i];
      tail_idx = i;
    }
  }
  if (tail_idx == P)
    throw std::invalid_argument("sample has no points beyond the tail threshold");

  ConditionReport rep;
  rep.items.push_back({"(1) tail infimum |a0 + a1^|", tail_min > kInfimumFloor, tail_min,
                       sample.points[tail_idx]});
  auto denom = minimum_of(den_abs);
  rep.items.push_back({"(1) denominator infimum |b0 + b1^|", denom.value > kInfimumFloor,
                       denom.value, sample.points[denom.index]});
  auto sector = maximum_of(arg_zeta);
  rep.items.push_back({"(2) time symbol in sector", sector.value <= phi + kSectorTol,
                       sector.value, sample.points[sector.index]});
  const char* labels[4] = {"(3) bound C0 on |a1^|", "(3) bound C1 on |xi d/dxi a1^|",
                           "(3) bound C2 on |b1^|", "(3) bound C3 on |xi d/dxi b1^|"};
  const std::vector<double>* series[4] = {&b0v, &b1v, &b2v, &b3v};
  const char* keys[4] = {"C0", "C1", "C2", "C3"};
  for (int j = 0; j < 4; ++j) {
    auto m = maximum_of(*series[j]);
    rep.items.push_back({labels[j], std::isfinite(m.value), m.value, sample.points[m.index]});
    rep.constants[keys[j]] = m.value;
  }
  rep.constants["A_tail"] = tail_min;
  rep.constants["C_b"] = denom.value;
  rep.overall = true;
  for (const auto& item : rep.items) rep.overall = rep.overall && item.pass;
  return rep;
}

namespace {

void validate_exponents(double q, double p) {
  if (!(q > 1.0) || !(p >= q) || !std::isfinite(p))
    throw std::invalid_argument("exponents must satisfy 1 < q <= p < infinity");
}

template <typename Value>
Value central_difference(const std::function<Value(const std::array<double, 2>&)>& f,
                         const std::array<double, 2>& pt, const std::array<int, 2>& alpha,
                         int dim) {
  double r = radius_of(pt, dim);
  double h = 1e-4 * std::max(1.0, r);
  int order = order_of(alpha, dim);
  if (order == 1) {
    int axis = alpha[0] == 1 ? 0 : 1;
    auto plus = pt, minus = pt;
    plus[axis] += h;
    minus[axis] -= h;
    return (f(plus) - f(minus)) / (2.0 * h);
  }
  auto pp = pt, pm = pt, mp = pt, mm = pt;
  pp[0] += h; pp[1] += h;
  pm[0] += h; pm[1] -= h;
  mp[0] -= h; mp[1] += h;
  mm[0] -= h; mm[1] -= h;
  return (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
}

struct SweepResult {
  std::map<std::string, double> per_alpha;
  bool divergence = false;
  std::vector<std::vector<double>> values;  // per alpha, per point
};

// Shared sweep: evaluates the weighted derivative magnitude of the symbol at
// every sample point for every multi-index.
template <typename Value, typename NormFn>
SweepResult weighted_sweep(
    const std::function<Value(const std::array<double, 2>&)>& value,
    const std::function<Value(const std::array<double, 2>&, const std::array<int, 2>&)>&
        derivative,
    const NormFn& norm_of, double q, double p, int d, const XiSample& sample) {
  const auto alphas = all_multi_indices(d);
  const std::size_t P = sample.points.size();
  const double gamma = d * (1.0 / q - 1.0 / p);
  SweepResult res;
  res.values.assign(alphas.size(), std::vector<double>(P, 0.0));
  std::vector<double> log_r(P, 0.0);
  parallel_for_guarded(P, [&](std::size_t i) {
    const auto& pt = sample.points[i];
    double r = radius_of(pt, d);
    log_r[i] = std::log10(r);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      const auto& alpha = alphas[ai];
      Value v;
      if (order_of(alpha, d) == 0) {
        v = value(pt);
      } else if (derivative) {
        v = derivative(pt, alpha);
      } else {
        v = central_difference<Value>(value, pt, alpha, d);
      }
      double n = norm_of(v);
      if (!std::isfinite(n))
        throw std::runtime_error("symbol value is not finite at xi = " + xi_text(pt, d));
      double w = std::pow(r, order_of(alpha, d) + gamma);
      res.values[ai][i] = w * n;
    }
  });
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    res.per_alpha[alpha_key(alphas[ai], d)] = maximum_of(res.values[ai]).value;
    if (trend_diverges(log_r, res.values[ai])) res.divergence = true;
  }
  return res;
}

}  // namespace

std::string MikhlinReport::text() const {
  std::ostringstream out;
  for (const auto& [key, value] : per_alpha) {
    out << "alpha " << key << ": " << format_double(value) << "\n";
  }
  out << "overall sup: " << format_double(overall_sup) << "\n";
  if (divergence_flag) out << "warning: weighted values grow toward the sample edge\n";
  return out.str();
}

MikhlinReport mikhlin_functional_scalar(const ScalarSymbol& psi, double q, double p, int d,
                                        const XiSample& sample) {
  if (d != 1 && d != 2) throw std::invalid_argument("dimension must be 1 or 2");
  validate_exponents(q, p);
  validate_sample(sample, d);
  if (!psi.value) throw std::invalid_argument("symbol callable is empty");
  auto res = weighted_sweep<Complex>(
      psi.value, psi.derivative, [](const Complex& v) { return std::abs(v); }, q, p, d,
      sample);
  MikhlinReport rep;
  rep.per_alpha = std::move(res.per_alpha);
  rep.q = q;
  rep.p = p;
  rep.dim = d;
  rep.divergence_flag = res.divergence;
  for (const auto& [key, value] : rep.per_alpha) rep.overall_sup = std::max(rep.overall_sup, value);
  return rep;
}

MikhlinReport mikhlin_functional_operator(const OperatorSymbolProbe& M, double q, double p,
                                          int d, const XiSample& sample, MikhlinMode mode,
                                          std::uint64_t seed) {
  if (d != 1 && d != 2) throw std::invalid_argument("dimension must be 1 or 2");
  validate_exponents(q, p);
  validate_sample(sample, d);
  if (!M.value) throw std::invalid_argument("symbol callable is empty");
  auto res = weighted_sweep<Eigen::MatrixXcd>(
      M.value, M.derivative, [](const Eigen::MatrixXcd& v) { return operator_norm_2(v); }, q,
      p, d, sample);

  MikhlinReport rep;
  rep.q = q;
  rep.p = p;
  rep.dim = d;
  rep.divergence_flag = res.divergence;
  if (mode == MikhlinMode::norm_sup) {
    rep.per_alpha = std::move(res.per_alpha);
  } else {
    const auto alphas = all_multi_indices(d);
    const std::size_t P = sample.points.size();
    const double gamma = d * (1.0 / q - 1.0 / p);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      // keep the heaviest frequencies so the family carries the sup
      std::vector<std::size_t> order(P);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (res.values[ai][a] != res.values[ai][b]) return res.values[ai][a] > res.values[ai][b];
        return a < b;
      });
      const std::size_t keep = std::min<std::size_t>(64, P);
      OperatorFamily family;
      for (std::size_t j = 0; j < keep; ++j) {
        const auto& pt = sample.points[order[j]];
        double r = radius_of(pt, d);
        const auto& alpha = alphas[ai];
        Eigen::MatrixXcd deriv;
        if (order_of(alpha, d) == 0) {
          deriv = M.value(pt);
        } else if (M.derivative) {
          deriv = M.derivative(pt, alpha);
        } else {
          deriv = central_difference<Eigen::MatrixXcd>(M.value, pt, alpha, d);
        }
        double w = std::pow(r, order_of(alpha, d) + gamma);
        family.members.push_back(w * deriv);
        family.labels.push_back(r);
      }
      int draw = std::min<int>(6, static_cast<int>(4 * family.members.size()));
      auto est = estimate_R_bound(family, 2.0, 100, draw, derive_seed(seed, ai));
      rep.per_alpha[alpha_key(alphas[ai], d)] = est.value;
    }
  }
  for (const auto& [key, value] : rep.per_alpha) rep.overall_sup = std::max(rep.overall_sup, value);
  return rep;
}

}  // namespace coe
