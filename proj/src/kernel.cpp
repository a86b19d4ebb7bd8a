#include "coe/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace coe {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("kernel dimension must be 1 or 2");
}

void check_point(const Kernel& k, const std::vector<double>& t) {
  if (static_cast<int>(t.size()) != k.dim())
    throw std::invalid_argument("point dimension does not match kernel dimension");
}

// One-dimensional factors of the separable catalog.
double exp_factor_value(double m, double t) { return std::exp(-m * std::abs(t)); }
double exp_factor_transform(double m, double xi) { return 2.0 * m / (m * m + xi * xi); }
double exp_factor_transform_d(double m, double xi) {
  double den = m * m + xi * xi;
  return -4.0 * m * xi / (den * den);
}
double gauss_factor_value(double s, double t) { return std::exp(-t * t / (2.0 * s * s)); }
double gauss_factor_transform(double s, double xi) {
  return s * std::sqrt(2.0 * kPi) * std::exp(-s * s * xi * xi / 2.0);
}
double gauss_factor_transform_d(double s, double xi) {
  return -s * s * xi * gauss_factor_transform(s, xi);
}

// Moments \int_{-1}^{1} u^n e^{-i theta u} du, stable for small theta.
struct Moments {
  Complex i0, i1, i2;
};

Moments oscillatory_moments(double theta) {
  Moments m;
  double a = std::abs(theta);
  if (a < 0.05) {
    double t2 = theta * theta;
    double i0 = 2.0 * (1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0 +
                       t2 * t2 * t2 * t2 / 362880.0);
    double i1 = theta * (1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0 - t2 * t2 * t2 / 45360.0);
    double i2 = 2.0 * (1.0 / 3.0 - t2 / 10.0 + t2 * t2 / 168.0 - t2 * t2 * t2 / 6480.0);
    m.i0 = {i0, 0.0};
    m.i1 = {0.0, -2.0 * i1};
    m.i2 = {i2, 0.0};
    return m;
  }
  double s = std::sin(theta), c = std::cos(theta);
  m.i0 = {2.0 * s / theta, 0.0};
  m.i1 = {0.0, -2.0 * (s - theta * c) / (theta * theta)};
  m.i2 = {2.0 * (2.0 * theta * c + (theta * theta - 2.0) * s) / (theta * theta * theta), 0.0};
  return m;
}

// Integrates the quadratic interpolant of `values` (on 2*panels+1 equispaced
// nodes spanning [t0, t0 + 2*panels*delta]) against e^{-i t xi}, panel by
// panel, with the oscillatory factor handled exactly.
Complex filon_panels(const std::vector<Complex>& values, double t0, double delta, double xi) {
  std::size_t panels = (values.size() - 1) / 2;
  double theta = delta * xi;
  Moments mo = oscillatory_moments(theta);
  Complex total{0.0, 0.0};
  // e^{-i t_mid xi} advanced by e^{-2 i delta xi} per panel; the recurrence
  // is refreshed periodically to keep roundoff from accumulating.
  Complex step = std::polar(1.0, -2.0 * delta * xi);
  Complex phase = std::polar(1.0, -(t0 + delta) * xi);
  for (std::size_t i = 0; i < panels; ++i) {
    if ((i & 1023u) == 0u) phase = std::polar(1.0, -(t0 + (2.0 * i + 1.0) * delta) * xi);
    const Complex fm = values[2 * i], f0 = values[2 * i + 1], fp = values[2 * i + 2];
    const Complex a = f0;
    const Complex b = 0.5 * (fp - fm);
    const Complex c = 0.5 * (fp + fm) - f0;
    total += phase * (a * mo.i0 + b * mo.i1 + c * mo.i2);
    phase *= step;
  }
  return delta * total;
}

}  // namespace

Kernel::Kernel() = default;

Kernel Kernel::zero(int dim) {
  check_dim(dim);
  Kernel k;
  k.kind_ = KernelKind::zero;
  k.dim_ = dim;
  return k;
}

Kernel Kernel::exponential(double decay, int dim) {
  check_dim(dim);
  if (!(decay > 0.0)) throw std::invalid_argument("exponential kernel needs decay > 0");
  Kernel k;
  k.kind_ = KernelKind::exponential;
  k.dim_ = dim;
  k.param_ = decay;
  return k;
}

Kernel Kernel::gaussian(double width, int dim) {
  check_dim(dim);
  if (!(width > 0.0)) throw std::invalid_argument("gaussian kernel needs width > 0");
  Kernel k;
  k.kind_ = KernelKind::gaussian;
  k.dim_ = dim;
  k.param_ = width;
  return k;
}

Kernel Kernel::scaled_sum(std::vector<std::pair<Complex, Kernel>> terms) {
  Kernel k;
  k.kind_ = KernelKind::scaled_sum;
  if (!terms.empty()) {
    k.dim_ = terms.front().second.dim();
    for (const auto& [coef, child] : terms) {
      (void)coef;
      if (child.dim() != k.dim_)
        throw std::invalid_argument("scaled_sum mixes kernel dimensions");
    }
  }
  k.terms_ = std::move(terms);
  return k;
}

bool Kernel::is_zero() const {
  switch (kind_) {
    case KernelKind::zero:
      return true;
    case KernelKind::scaled_sum:
      return std::all_of(terms_.begin(), terms_.end(), [](const auto& term) {
        return term.first == Complex{0.0, 0.0} || term.second.is_zero();
      });
    default:
      return false;
  }
}

double Kernel::decay_rate() const {
  switch (kind_) {
    case KernelKind::zero:
      return std::numeric_limits<double>::infinity();
    case KernelKind::exponential:
      return param_;
    case KernelKind::gaussian:
      return 1.0 / param_;
    case KernelKind::scaled_sum: {
      double rate = std::numeric_limits<double>::infinity();
      for (const auto& [coef, child] : terms_) {
        if (coef == Complex{0.0, 0.0} || child.is_zero()) continue;
        rate = std::min(rate, child.decay_rate());
      }
      return rate;
    }
  }
  return std::numeric_limits<double>::infinity();
}

Complex Kernel::value(const std::vector<double>& t) const {
  check_point(*this, t);
  switch (kind_) {
    case KernelKind::zero:
      return {0.0, 0.0};
    case KernelKind::exponential: {
      double acc = 1.0;
      for (double ti : t) acc *= exp_factor_value(param_, ti);
      return {acc, 0.0};
    }
    case KernelKind::gaussian: {
      double acc = 1.0;
      for (double ti : t) acc *= gauss_factor_value(param_, ti);
      return {acc, 0.0};
    }
    case KernelKind::scaled_sum: {
      Complex acc{0.0, 0.0};
      for (const auto& [coef, child] : terms_) acc += coef * child.value(t);
      return acc;
    }
  }
  return {0.0, 0.0};
}

Complex Kernel::transform(const std::vector<double>& xi) const {
  check_point(*this, xi);
  switch (kind_) {
    case KernelKind::zero:
      return {0.0, 0.0};
    case KernelKind::exponential: {
      double acc = 1.0;
      for (double x : xi) acc *= exp_factor_transform(param_, x);
      return {acc, 0.0};
    }
    case KernelKind::gaussian: {
      double acc = 1.0;
      for (double x : xi) acc *= gauss_factor_transform(param_, x);
      return {acc, 0.0};
    }
    case KernelKind::scaled_sum: {
      Complex acc{0.0, 0.0};
      for (const auto& [coef, child] : terms_) acc += coef * child.transform(xi);
      return acc;
    }
  }
  return {0.0, 0.0};
}

Complex Kernel::transform_derivative(const std::vector<double>& xi,
                                     const std::vector<int>& alpha) const {
  check_point(*this, xi);
  if (alpha.size() != xi.size())
    throw std::invalid_argument("derivative multi-index dimension mismatch");
  for (int a : alpha)
    if (a != 0 && a != 1)
      throw std::invalid_argument("derivative orders are limited to one per axis");
  switch (kind_) {
    case KernelKind::zero:
      return {0.0, 0.0};
    case KernelKind::exponential: {
      double acc = 1.0;
      for (std::size_t i = 0; i < xi.size(); ++i)
        acc *= alpha[i] ? exp_factor_transform_d(param_, xi[i])
                        : exp_factor_transform(param_, xi[i]);
      return {acc, 0.0};
    }
    case KernelKind::gaussian: {
      double acc = 1.0;
      for (std::size_t i = 0; i < xi.size(); ++i)
        acc *= alpha[i] ? gauss_factor_transform_d(param_, xi[i])
                        : gauss_factor_transform(param_, xi[i]);
      return {acc, 0.0};
    }
    case KernelKind::scaled_sum: {
      Complex acc{0.0, 0.0};
      for (const auto& [coef, child] : terms_)
        acc += coef * child.transform_derivative(xi, alpha);
      return acc;
    }
  }
  return {0.0, 0.0};
}

Complex Kernel::value(double t) const { return value(std::vector<double>{t}); }
Complex Kernel::transform(double xi) const { return transform(std::vector<double>{xi}); }
Complex Kernel::transform_derivative(double xi, int order) const {
  return transform_derivative(std::vector<double>{xi}, std::vector<int>{order});
}

Complex numeric_transform_oracle(const Kernel& k, const std::vector<double>& xi,
                                 double halfwidth, int panels) {
  check_point(k, xi);
  if (!(halfwidth > 0.0) || panels < 2)
    throw std::invalid_argument("oracle needs halfwidth > 0 and at least 2 panels");
  const std::size_t nodes = 2 * static_cast<std::size_t>(panels) + 1;
  const double delta = halfwidth / panels;
  if (k.dim() == 1) {
    std::vector<Complex> values(nodes);
    for (std::size_t j = 0; j < nodes; ++j)
      values[j] = k.value(-halfwidth + static_cast<double>(j) * delta);
    return filon_panels(values, -halfwidth, delta, xi[0]);
  }
  // Nested rule: transform along the second axis for every first-axis node,
  // then integrate the (complex) profile along the first axis.
  std::vector<Complex> row(nodes), profile(nodes);
  std::vector<double> t(2);
  for (std::size_t j1 = 0; j1 < nodes; ++j1) {
    t[0] = -halfwidth + static_cast<double>(j1) * delta;
    for (std::size_t j2 = 0; j2 < nodes; ++j2) {
      t[1] = -halfwidth + static_cast<double>(j2) * delta;
      row[j2] = k.value(t);
    }
    profile[j1] = filon_panels(row, -halfwidth, delta, xi[1]);
  }
  return filon_panels(profile, -halfwidth, delta, xi[0]);
}

Complex numeric_transform_oracle(const Kernel& k, double xi, double halfwidth, int panels) {
  return numeric_transform_oracle(k, std::vector<double>{xi}, halfwidth, panels);
}

double recommended_halfwidth(const Kernel& k, double tail_tol) {
  if (!(tail_tol > 0.0)) throw std::invalid_argument("tail tolerance must be positive");
  switch (k.kind()) {
    case KernelKind::zero:
      return 1.0;
    case KernelKind::exponential: {
      double m = k.parameter();
      double axis_mass = 2.0 / m;
      double budget = 0.25 * tail_tol / (k.dim() * std::pow(axis_mass, k.dim() - 1));
      return std::max(1.0, std::log(axis_mass / budget) / m);
    }
    case KernelKind::gaussian: {
      double s = k.parameter();
      double axis_mass = s * std::sqrt(2.0 * kPi);
      double budget = tail_tol / (k.dim() * std::pow(axis_mass, k.dim() - 1));
      double arg = std::max(1.0, axis_mass / budget);
      return s * (std::sqrt(2.0 * std::log(arg)) + 1.0);
    }
    case KernelKind::scaled_sum: {
      double H = 1.0;
      double total = 0.0;
      for (const auto& [coef, child] : k.terms()) {
        (void)child;
        total += std::abs(coef);
      }
      if (total == 0.0) return 1.0;
      for (const auto& [coef, child] : k.terms()) {
        if (std::abs(coef) == 0.0 || child.is_zero()) continue;
        double share = tail_tol * std::abs(coef) / total / std::abs(coef);
        H = std::max(H, recommended_halfwidth(child, share / k.terms().size()));
      }
      return H;
    }
  }
  return 1.0;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits at top-level commas, respecting nested parentheses.
std::vector<std::string_view> split_args(std::string_view body) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char ch = body[i];
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      parts.push_back(body.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(body.substr(start));
  return parts;
}

double parse_named_float(std::string_view body, std::string_view key) {
  body = trim(body);
  auto eq = body.find('=');
  if (eq == std::string_view::npos || trim(body.substr(0, eq)) != key)
    throw std::invalid_argument("expected " + std::string(key) + "=<float>");
  Complex v = parse_complex(trim(body.substr(eq + 1)));
  if (v.imag() != 0.0) throw std::invalid_argument("parameter must be real");
  return v.real();
}

}  // namespace

Kernel parse_kernel(std::string_view text, int dim) {
  text = trim(text);
  if (text == "zero") return Kernel::zero(dim);
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw std::invalid_argument("unrecognized kernel: " + std::string(text));
  auto head = trim(text.substr(0, open));
  auto body = text.substr(open + 1, text.size() - open - 2);
  if (head == "exp") return Kernel::exponential(parse_named_float(body, "m"), dim);
  if (head == "gauss") return Kernel::gaussian(parse_named_float(body, "s"), dim);
  if (head == "sum") {
    std::vector<std::pair<Complex, Kernel>> terms;
    for (auto part : split_args(body)) {
      part = trim(part);
      int depth = 0;
      std::size_t star = std::string_view::npos;
      for (std::size_t i = 0; i < part.size(); ++i) {
        if (part[i] == '(') ++depth;
        if (part[i] == ')') --depth;
        if (part[i] == '*' && depth == 0) {
          star = i;
          break;
        }
      }
      if (star == std::string_view::npos)
        throw std::invalid_argument("sum term needs <coef>*<kernel>");
      Complex coef = parse_complex(trim(part.substr(0, star)));
      terms.emplace_back(coef, parse_kernel(part.substr(star + 1), dim));
    }
    return Kernel::scaled_sum(std::move(terms));
  }
  throw std::invalid_argument("unrecognized kernel: " + std::string(text));
}

std::string format_kernel(const Kernel& k) {
  switch (k.kind()) {
    case KernelKind::zero:
      return "zero";
    case KernelKind::exponential:
      return "exp(m=" + format_double(k.parameter()) + ")";
    case KernelKind::gaussian:
      return "gauss(s=" + format_double(k.parameter()) + ")";
    case KernelKind::scaled_sum: {
      std::string out = "sum(";
      bool first = true;
      for (const auto& [coef, child] : k.terms()) {
        if (!first) out += ",";
        first = false;
        out += format_complex(coef) + "*" + format_kernel(child);
      }
      return out + ")";
    }
  }
  return "zero";
}

}  // namespace coe
