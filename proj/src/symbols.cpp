#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "coe/multiplier.hpp"

namespace coe {

namespace {

std::string xi_label(const std::array<double, 2>& xi, int dim) {
  if (dim == 1) return format_double(xi[0]);
  return "(" + format_double(xi[0]) + ", " + format_double(xi[1]) + ")";
}

[[noreturn]] void rethrow_singular(const std::array<double, 2>& xi, int dim) {
  throw std::runtime_error("resolvent solve failed at xi = " + xi_label(xi, dim) +
                           "; the shifted operator is singular there");
}

[[noreturn]] void throw_drained(const std::array<double, 2>& xi, int dim) {
  throw std::runtime_error("denominator b1^ + b0 vanishes at xi = " + xi_label(xi, dim));
}

std::vector<double> as_vector(const std::array<double, 2>& pt, int dim) {
  return std::vector<double>(pt.begin(), pt.begin() + dim);
}

std::vector<int> unit_alpha(int dim, int axis) {
  std::vector<int> a(dim, 0);
  a[axis] = 1;
  return a;
}

struct EllipticCore {
  EllipticCoefficients co;
  SectorialOperator A;
  std::shared_ptr<ResolventCache> cache;

  Complex denom(const std::vector<double>& xi) const { return co.b1.transform(xi) + co.b0; }

  Complex big_n(const std::vector<double>& xi) const {
    Complex n{0.0, 0.0};
    for (int k = 0; k < co.dim; ++k) {
      for (int j = 0; j < co.dim; ++j) {
        n += (co.c(k, j) + co.a[k][j].transform(xi)) * (xi[k] * xi[j]);
      }
    }
    return n;
  }

  Complex big_n_derivative(const std::vector<double>& xi, int axis) const {
    auto alpha = unit_alpha(co.dim, axis);
    Complex out{0.0, 0.0};
    for (int k = 0; k < co.dim; ++k) {
      for (int j = 0; j < co.dim; ++j) {
        out += co.a[k][j].transform_derivative(xi, alpha) * (xi[k] * xi[j]);
      }
    }
    for (int j = 0; j < co.dim; ++j) {
      out += (co.c(axis, j) + co.a[axis][j].transform(xi)) * xi[j];
      out += (co.c(j, axis) + co.a[j][axis].transform(xi)) * xi[j];
    }
    return out;
  }

  Eigen::MatrixXcd resolvent(Complex eta, const std::array<double, 2>& pt) const {
    try {
      return A.shifted_inverse(eta, cache.get());
    } catch (const SingularResolvent&) {
      rethrow_singular(pt, co.dim);
    }
  }
};

struct ParabolicCore {
  ParabolicCoefficients co;
  SectorialOperator A;
  std::shared_ptr<ResolventCache> cache;

  struct Scalars {
    Complex ah, ahp, bh, bhp, mu, eta;
  };

  Scalars at(double xi) const {
    Scalars s;
    s.ah = co.a1.transform(xi);
    s.ahp = co.a1.transform_derivative(xi, 1);
    s.bh = co.b1.transform(xi);
    s.bhp = co.b1.transform_derivative(xi, 1);
    Complex den = s.bh + co.b0;
    if (den == 0.0) throw_drained({xi, 0.0}, 1);
    s.mu = 1.0 / den;
    s.eta = Complex(0.0, xi) * (s.ah + co.a0) * s.mu;
    return s;
  }

  Eigen::MatrixXcd resolvent(Complex eta, double xi) const {
    try {
      return A.shifted_inverse(eta, cache.get());
    } catch (const SingularResolvent&) {
      rethrow_singular({xi, 0.0}, 1);
    }
  }
};

struct CauchyCore {
  SectorialOperator A;
  std::shared_ptr<ResolventCache> cache;

  Eigen::MatrixXcd resolvent(Complex shift, double xi) const {
    try {
      return A.shifted_inverse(shift, cache.get());
    } catch (const SingularResolvent&) {
      rethrow_singular({xi, 0.0}, 1);
    }
  }
};

}  // namespace

MultiplierSymbol elliptic_symbol(const EllipticCoefficients& coeffs, const SectorialOperator& A,
                                 std::shared_ptr<ResolventCache> cache) {
  const int d = coeffs.dim;
  if (d != 1 && d != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (coeffs.c.rows() != d || coeffs.c.cols() != d)
    throw std::invalid_argument("constant matrix must be d x d");
  if (coeffs.a.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("kernel array must be d x d");
  auto core = std::make_shared<const EllipticCore>(EllipticCore{coeffs, A, std::move(cache)});

  MultiplierSymbol sym;
  sym.dim = d;
  sym.e_dim = A.dim();
  sym.name = "sigma";
  sym.evaluate = [core](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    auto xi = as_vector(pt, core->co.dim);
    Complex bh = core->denom(xi);
    if (bh == 0.0) throw_drained(pt, core->co.dim);
    Complex mu = 1.0 / bh;
    Complex eta = core->big_n(xi) * mu;
    return mu * core->resolvent(eta, pt);
  };
  sym.derivative = [core](const std::array<double, 2>& pt, int axis) -> Eigen::MatrixXcd {
    auto xi = as_vector(pt, core->co.dim);
    Complex bh = core->denom(xi);
    if (bh == 0.0) throw_drained(pt, core->co.dim);
    Complex mu = 1.0 / bh;
    Complex n = core->big_n(xi);
    Eigen::MatrixXcd S = core->resolvent(n * mu, pt);
    Complex bp = core->co.b1.transform_derivative(xi, unit_alpha(core->co.dim, axis));
    Complex np = core->big_n_derivative(xi, axis);
    Eigen::MatrixXcd S2 = S * S;
    return (-bp * mu * mu) * S + (-np * mu * mu) * S2 + (n * bp * mu * mu * mu) * S2;
  };
  std::vector<double> origin(d, 0.0);
  Complex bh0 = core->denom(origin);
  if (bh0 != 0.0 && A.is_invertible()) {
    sym.zero_value = ((1.0 / bh0) * A.shifted_inverse(Complex(0.0, 0.0))).eval();
  }
  return sym;
}

ParabolicSymbols parabolic_symbols(const ParabolicCoefficients& coeffs,
                                   const SectorialOperator& A, bool reuse_factorizations) {
  if (coeffs.a1.dim() != 1 || coeffs.b1.dim() != 1)
    throw std::invalid_argument("kernels must be one-dimensional");
  auto cache = reuse_factorizations ? std::make_shared<ResolventCache>(A) : nullptr;
  auto core = std::make_shared<const ParabolicCore>(ParabolicCore{coeffs, A, cache});
  const int n = A.dim();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);

  ParabolicSymbols out;
  out.cache = cache;
  for (auto* m : {&out.m0, &out.m1, &out.m2, &out.m3, &out.m4}) {
    m->dim = 1;
    m->e_dim = n;
  }
  out.m0.name = "m0";
  out.m1.name = "m1";
  out.m2.name = "m2";
  out.m3.name = "m3";
  out.m4.name = "m4";

  out.m0.evaluate = [core](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    auto s = core->at(pt[0]);
    return s.mu * core->resolvent(s.eta, pt[0]);
  };
  out.m1.evaluate = [core](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    auto s = core->at(pt[0]);
    return (Complex(0.0, pt[0]) * s.mu) * core->resolvent(s.eta, pt[0]);
  };
  out.m2.evaluate = [core](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    auto s = core->at(pt[0]);
    return (s.ah * Complex(0.0, pt[0]) * s.mu) * core->resolvent(s.eta, pt[0]);
  };
  out.m3.evaluate = [core, I](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    auto s = core->at(pt[0]);
    return s.mu * (I - s.eta * core->resolvent(s.eta, pt[0]));
  };
  out.m4.evaluate = [core, I](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    auto s = core->at(pt[0]);
    return (s.bh * s.mu) * (I - s.eta * core->resolvent(s.eta, pt[0]));
  };

  // shared analytic pieces: mu' = -bh' mu^2, eta' by the product rule,
  // dS = -eta' S^2
  auto parts = [core](double xi) {
    auto s = core->at(xi);
    Complex mup = -s.bhp * s.mu * s.mu;
    Complex etap = Complex(0.0, 1.0) * (s.ah + core->co.a0) * s.mu +
                   Complex(0.0, xi) * (s.ahp * s.mu + (s.ah + core->co.a0) * mup);
    return std::tuple{s, mup, etap};
  };
  out.m0.derivative = [core, parts](const std::array<double, 2>& pt,
                                    int) -> Eigen::MatrixXcd {
    auto [s, mup, etap] = parts(pt[0]);
    Eigen::MatrixXcd S = core->resolvent(s.eta, pt[0]);
    return mup * S - (s.mu * etap) * (S * S);
  };
  out.m1.derivative = [core, parts](const std::array<double, 2>& pt,
                                    int) -> Eigen::MatrixXcd {
    auto [s, mup, etap] = parts(pt[0]);
    Eigen::MatrixXcd S = core->resolvent(s.eta, pt[0]);
    Eigen::MatrixXcd m0p = mup * S - (s.mu * etap) * (S * S);
    return Complex(0.0, 1.0) * (s.mu * S) + Complex(0.0, pt[0]) * m0p;
  };
  out.m2.derivative = [core, parts](const std::array<double, 2>& pt,
                                    int) -> Eigen::MatrixXcd {
    auto [s, mup, etap] = parts(pt[0]);
    Eigen::MatrixXcd S = core->resolvent(s.eta, pt[0]);
    Eigen::MatrixXcd m0p = mup * S - (s.mu * etap) * (S * S);
    Eigen::MatrixXcd m1 = (Complex(0.0, pt[0]) * s.mu) * S;
    Eigen::MatrixXcd m1p = Complex(0.0, 1.0) * (s.mu * S) + Complex(0.0, pt[0]) * m0p;
    return s.ahp * m1 + s.ah * m1p;
  };
  out.m3.derivative = [core, parts, I](const std::array<double, 2>& pt,
                                       int) -> Eigen::MatrixXcd {
    auto [s, mup, etap] = parts(pt[0]);
    Eigen::MatrixXcd S = core->resolvent(s.eta, pt[0]);
    return mup * (I - s.eta * S) - (s.mu * etap) * S + (s.mu * s.eta * etap) * (S * S);
  };
  out.m4.derivative = [core, parts, I](const std::array<double, 2>& pt,
                                       int) -> Eigen::MatrixXcd {
    auto [s, mup, etap] = parts(pt[0]);
    Eigen::MatrixXcd S = core->resolvent(s.eta, pt[0]);
    Eigen::MatrixXcd m3 = s.mu * (I - s.eta * S);
    Eigen::MatrixXcd m3p =
        mup * (I - s.eta * S) - (s.mu * etap) * S + (s.mu * s.eta * etap) * (S * S);
    return s.bhp * m3 + s.bh * m3p;
  };

  Complex bh0 = coeffs.b1.transform(0.0) + coeffs.b0;
  out.m1.zero_value = Eigen::MatrixXcd::Zero(n, n);
  out.m2.zero_value = Eigen::MatrixXcd::Zero(n, n);
  if (bh0 != 0.0) {
    Complex mu0 = 1.0 / bh0;
    if (A.is_invertible()) {
      out.m0.zero_value = (mu0 * A.shifted_inverse(Complex(0.0, 0.0))).eval();
    }
    out.m3.zero_value = (mu0 * I).eval();
    out.m4.zero_value = (coeffs.b1.transform(0.0) * mu0 * I).eval();
  }
  return out;
}

CauchySymbols cauchy_symbols(const SectorialOperator& A, bool reuse_factorizations) {
  auto cache = reuse_factorizations ? std::make_shared<ResolventCache>(A) : nullptr;
  auto core = std::make_shared<const CauchyCore>(CauchyCore{A, cache});
  const int n = A.dim();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);

  CauchySymbols out;
  out.cache = cache;
  for (auto* m : {&out.m0, &out.m1, &out.sigma0, &out.sigma1, &out.sigma2, &out.sigma3}) {
    m->dim = 1;
    m->e_dim = n;
  }
  out.m0.name = "m0";
  out.m1.name = "m1";
  out.sigma0.name = "sigma0";
  out.sigma1.name = "sigma1";
  out.sigma2.name = "sigma2";
  out.sigma3.name = "sigma3";

  out.m0.evaluate = [core](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    return core->resolvent(Complex(0.0, pt[0]), pt[0]);
  };
  out.m1.evaluate = [core, I](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    return Complex(0.0, pt[0]) * core->resolvent(Complex(0.0, pt[0]), pt[0]) - I;
  };
  out.m0.derivative = [core](const std::array<double, 2>& pt, int) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd S = core->resolvent(Complex(0.0, pt[0]), pt[0]);
    return Complex(0.0, -1.0) * (S * S);
  };
  out.m1.derivative = [core](const std::array<double, 2>& pt, int) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd S = core->resolvent(Complex(0.0, pt[0]), pt[0]);
    return Complex(0.0, 1.0) * S + pt[0] * (S * S);
  };

  out.sigma0.evaluate = [core](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    return core->resolvent(Complex(pt[0] * pt[0], 0.0), pt[0]);
  };
  out.sigma1.evaluate = [core](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    return pt[0] * core->resolvent(Complex(pt[0] * pt[0], 0.0), pt[0]);
  };
  out.sigma2.evaluate = [core](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    return (pt[0] * pt[0]) * core->resolvent(Complex(pt[0] * pt[0], 0.0), pt[0]);
  };
  out.sigma3.evaluate = [core, I](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    return I - (pt[0] * pt[0]) * core->resolvent(Complex(pt[0] * pt[0], 0.0), pt[0]);
  };
  out.sigma0.derivative = [core](const std::array<double, 2>& pt, int) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd S = core->resolvent(Complex(pt[0] * pt[0], 0.0), pt[0]);
    return (-2.0 * pt[0]) * (S * S);
  };
  out.sigma1.derivative = [core](const std::array<double, 2>& pt, int) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd S = core->resolvent(Complex(pt[0] * pt[0], 0.0), pt[0]);
    return S - (2.0 * pt[0] * pt[0]) * (S * S);
  };
  out.sigma2.derivative = [core](const std::array<double, 2>& pt, int) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd S = core->resolvent(Complex(pt[0] * pt[0], 0.0), pt[0]);
    return (2.0 * pt[0]) * S - (2.0 * pt[0] * pt[0] * pt[0]) * (S * S);
  };
  out.sigma3.derivative = [core](const std::array<double, 2>& pt, int) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd S = core->resolvent(Complex(pt[0] * pt[0], 0.0), pt[0]);
    return (2.0 * pt[0] * pt[0] * pt[0]) * (S * S) - (2.0 * pt[0]) * S;
  };

  out.sigma1.zero_value = Eigen::MatrixXcd::Zero(n, n);
  out.sigma2.zero_value = Eigen::MatrixXcd::Zero(n, n);
  out.sigma3.zero_value = I;
  if (A.is_invertible()) {
    Eigen::MatrixXcd inv = A.shifted_inverse(Complex(0.0, 0.0));
    out.m0.zero_value = inv;
    out.m1.zero_value = (-I).eval();
    out.sigma0.zero_value = inv;
  }
  return out;
}

GridFunction apply_multiplier(const MultiplierSymbol& M, const GridFunction& f) {
  if (!M.evaluate) throw std::invalid_argument("symbol has no evaluate callable");
  if (M.e_dim != f.e_dim)
    throw std::invalid_argument("symbol and function value dimensions differ");
  if (M.dim != f.grid.dim) throw std::invalid_argument("symbol and grid dimensions differ");
  if (f.space != Space::physical)
    throw std::invalid_argument("expected a physical-space function");

  GridFunction spectral = dft(f);
  GridFunction out = make_function(f.grid, f.e_dim, Space::spectral);
  parallel_for_guarded(f.grid.num_nodes(), [&](std::size_t j) {
    if (j == f.grid.zero_frequency_node()) {
      if (M.zero_value) {
        out.vec(j) = (*M.zero_value) * spectral.vec(j);
      } else {
        out.vec(j).setZero();
      }
      return;
    }
    auto fp = f.grid.freq_point(j);
    std::array<double, 2> pt{fp[0], fp.size() > 1 ? fp[1] : 0.0};
    Eigen::MatrixXcd m = M.evaluate(pt);
    if (m.rows() != f.e_dim || m.cols() != f.e_dim)
      throw std::runtime_error("symbol returned a matrix of the wrong size");
    out.vec(j) = m * spectral.vec(j);
  });
  return idft(out);
}

double estimate_Lq_to_Lp_norm(const MultiplierSymbol& M, double q, double p, const Grid& grid,
                              int ensemble_size, std::uint64_t seed) {
  if (ensemble_size < 1) throw std::invalid_argument("ensemble needs at least one member");
  require_gap(q, p, grid.dim);
  if (M.dim != grid.dim) throw std::invalid_argument("symbol and grid dimensions differ");

  double best = 0.0;
  for (int i = 0; i < ensemble_size; ++i) {
    GridFunction f;
    if (i == 0) {
      f = make_function(grid, M.e_dim);
      for (auto& v : f.values) v = Complex(1.0, 0.0);
    } else {
      f = random_band_limited(grid, M.e_dim, grid.n / 4, derive_seed(seed, i));
    }
    double den = lp_norm(f, q);
    double num = lp_norm(apply_multiplier(M, f), p);
    best = std::max(best, num / den);
  }
  return best;
}

MikhlinReport mikhlin_functional_operator(const MultiplierSymbol& M, double q, double p,
                                          const XiSample& sample, MikhlinMode mode,
                                          std::uint64_t seed) {
  OperatorSymbolProbe probe;
  probe.e_dim = M.e_dim;
  probe.value = M.evaluate;
  if (M.derivative) {
    auto deriv = M.derivative;
    int dim = M.dim;
    probe.derivative = [deriv, dim](const std::array<double, 2>& pt,
                                    const std::array<int, 2>& alpha) -> Eigen::MatrixXcd {
      int order = alpha[0] + (dim == 2 ? alpha[1] : 0);
      if (order == 1) return deriv(pt, alpha[0] == 1 ? 0 : 1);
      // mixed derivative: difference the first-axis closure along the other
      double h = 1e-4 * std::max(1.0, std::hypot(pt[0], pt[1]));
      auto plus = pt, minus = pt;
      plus[1] += h;
      minus[1] -= h;
      return ((deriv(plus, 0) - deriv(minus, 0)) / (2.0 * h)).eval();
    };
  }
  return mikhlin_functional_operator(probe, q, p, M.dim, sample, mode, seed);
}

}  // namespace coe
