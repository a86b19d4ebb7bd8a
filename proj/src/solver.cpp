#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "coe/solver.hpp"

namespace coe {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_shape(const SectorialOperator& A, const GridFunction& f, int dim) {
  if (f.grid.dim != dim) throw std::invalid_argument("forcing grid dimension mismatch");
  if (f.e_dim != A.dim())
    throw std::invalid_argument("forcing and operator dimensions differ");
  if (f.space != Space::physical)
    throw std::invalid_argument("expected a physical-space forcing");
}

GridFunction scale_spectrum(const GridFunction& u,
                            const std::function<Complex(const std::vector<double>&)>& s) {
  GridFunction F = dft(u);
  for (std::size_t j = 0; j < F.grid.num_nodes(); ++j) {
    F.vec(j) = (s(F.grid.freq_point(j)) * F.vec(j)).eval();
  }
  return idft(F);
}

GridFunction matrix_apply(const Eigen::MatrixXcd& m, const GridFunction& u) {
  GridFunction out = u;
  for (std::size_t j = 0; j < u.grid.num_nodes(); ++j) out.vec(j) = (m * u.vec(j)).eval();
  return out;
}

double relative_l2(const GridFunction& got, const GridFunction& want) {
  GridFunction diff = got;
  for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= want.values[i];
  double denom = lp_norm(want, 2.0);
  double num = lp_norm(diff, 2.0);
  return denom > 0.0 ? num / denom : (num > 0.0 ? num : 0.0);
}

double peak_magnitude(const GridFunction& f) {
  double peak = 0.0;
  for (const auto& v : f.values) peak = std::max(peak, std::abs(v));
  return peak;
}

bool effectively_mean_free(const GridFunction& f) {
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(f.e_dim);
  for (std::size_t j = 0; j < f.grid.num_nodes(); ++j) acc += f.vec(j);
  double mean = (acc / static_cast<double>(f.grid.num_nodes())).cwiseAbs().maxCoeff();
  return mean <= 1e-12 * peak_magnitude(f);
}

MultiplierSymbol forward_elliptic(const EllipticCoefficients& co, const SectorialOperator& A) {
  MultiplierSymbol w;
  w.dim = co.dim;
  w.e_dim = A.dim();
  w.name = "L";
  Eigen::MatrixXcd amat = A.matrix();
  w.evaluate = [co, amat](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    std::vector<double> xi(pt.begin(), pt.begin() + co.dim);
    Complex den = co.b1.transform(xi) + co.b0;
    Complex n{0.0, 0.0};
    for (int k = 0; k < co.dim; ++k) {
      for (int j = 0; j < co.dim; ++j) {
        n += (co.c(k, j) + co.a[k][j].transform(xi)) * (xi[k] * xi[j]);
      }
    }
    return den * amat + n * Eigen::MatrixXcd::Identity(amat.rows(), amat.cols());
  };
  std::vector<double> origin(co.dim, 0.0);
  w.zero_value = ((co.b1.transform(origin) + co.b0) * amat).eval();
  return w;
}

MultiplierSymbol forward_parabolic(const ParabolicCoefficients& co,
                                   const SectorialOperator& A) {
  MultiplierSymbol w;
  w.dim = 1;
  w.e_dim = A.dim();
  w.name = "L";
  Eigen::MatrixXcd amat = A.matrix();
  w.evaluate = [co, amat](const std::array<double, 2>& pt) -> Eigen::MatrixXcd {
    double xi = pt[0];
    Complex den = co.b1.transform(xi) + co.b0;
    Complex drift = Complex(0.0, xi) * (co.a1.transform(xi) + co.a0);
    return den * amat + drift * Eigen::MatrixXcd::Identity(amat.rows(), amat.cols());
  };
  w.zero_value = ((co.b1.transform(0.0) + co.b0) * amat).eval();
  return w;
}

GridFunction slice_components(const GridFunction& f, int offset, int count) {
  GridFunction out = make_function(f.grid, count, f.space);
  for (std::size_t j = 0; j < f.grid.num_nodes(); ++j) {
    for (int c = 0; c < count; ++c) out.at(j)[c] = f.at(j)[offset + c];
  }
  return out;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 5-point Gauss rule on [0, 1]
constexpr std::array<double, 5> kGaussNode{0.046910077030668004, 0.23076534494715845, 0.5,
                                           0.7692346550528415, 0.953089922969332};
constexpr std::array<double, 5> kGaussWeight{0.11846344252809454, 0.23931433524968324,
                                             0.28444444444444444, 0.23931433524968324,
                                             0.11846344252809454};

GridFunction march_semigroup(const SectorialOperator& A, const Grid& g, int e_dim,
                             const std::function<Eigen::VectorXcd(std::size_t, int)>& sample) {
  double h = g.spacing();
  Eigen::MatrixXcd step = A.semigroup_matrix(h);
  std::array<Eigen::MatrixXcd, 5> weights;
  for (int i = 0; i < 5; ++i) {
    weights[i] = (h * kGaussWeight[i]) * A.semigroup_matrix(h * (1.0 - kGaussNode[i]));
  }
  GridFunction out = make_function(g, e_dim);
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(e_dim);
  out.vec(0) = u;
  for (std::size_t j = 0; j + 1 < g.num_nodes(); ++j) {
    Eigen::VectorXcd next = step * u;
    for (int i = 0; i < 5; ++i) next += weights[i] * sample(j, i);
    u = next;
    out.vec(j + 1) = u;
  }
  return out;
}

GridFunction default_causal_forcing(const Grid& g, int e_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ctr(0.3, 0.6), wid(0.02, 0.03), amp(0.5, 1.5);
  GridFunction f = make_function(g, e_dim);
  double L = g.box;
  for (int c = 0; c < e_dim; ++c) {
    double c1 = ctr(rng) * L, w1 = wid(rng) * L, a1 = amp(rng);
    double c2 = ctr(rng) * L, w2 = wid(rng) * L, a2 = amp(rng);
    for (std::size_t j = 0; j < g.num_nodes(); ++j) {
      double t = g.node(static_cast<int>(j));
      f.at(j)[c] = a1 * std::exp(-(t - c1) * (t - c1) / (2.0 * w1 * w1)) +
                   a2 * std::exp(-(t - c2) * (t - c2) / (2.0 * w2 * w2));
    }
  }
  return f;
}

}  // namespace

EllipticResult solve_elliptic(const EllipticCoefficients& coeffs, const SectorialOperator& A,
                              const GridFunction& f, double p, double q) {
  if (coeffs.dim != 1 && coeffs.dim != 2)
    throw std::invalid_argument("dimension must be 1 or 2");
  require_shape(A, f, coeffs.dim);
  require_gap(q, p, coeffs.dim);
  ConditionReport report =
      check_condition_3_1(coeffs, A.sector_angle(), default_xi_sample(coeffs.dim));
  if (!report.overall) throw ConditionFailure(report);

  auto cache = std::make_shared<ResolventCache>(A);
  MultiplierSymbol sigma = elliptic_symbol(coeffs, A, cache);
  if (!sigma.zero_value.has_value() && !effectively_mean_free(f)) {
    throw std::invalid_argument(
        "zero frequency mode needs an invertible operator or mean-free forcing");
  }

  EllipticResult out;
  out.condition = std::move(report);
  out.solution.u = apply_multiplier(sigma, f);
  const GridFunction& u = out.solution.u;
  if (coeffs.dim == 1) {
    out.solution.derived["u''"] =
        scale_spectrum(u, [](const std::vector<double>& xi) { return -xi[0] * xi[0]; });
  } else {
    out.solution.derived["u_xx"] =
        scale_spectrum(u, [](const std::vector<double>& xi) { return -xi[0] * xi[0]; });
    out.solution.derived["u_yy"] =
        scale_spectrum(u, [](const std::vector<double>& xi) { return -xi[1] * xi[1]; });
    out.solution.derived["u_xy"] =
        scale_spectrum(u, [](const std::vector<double>& xi) { return -xi[0] * xi[1]; });
  }
  out.solution.derived["Au"] = matrix_apply(A.matrix(), u);

  GridFunction lu = apply_multiplier(forward_elliptic(coeffs, A), u);
  out.solution.residual = relative_l2(lu, f);
  double nf = lp_norm(f, q);
  out.sobolev_ratio = nf > 0.0 ? lp_norm(u, p) / nf : 0.0;
  return out;
}

namespace {

ParabolicResult parabolic_solve_with(const ParabolicSymbols& syms,
                                     const ParabolicCoefficients& coeffs,
                                     const SectorialOperator& A, const GridFunction& f,
                                     double p, ConditionReport report) {
  if (!syms.m0.zero_value.has_value() && !effectively_mean_free(f)) {
    throw std::invalid_argument(
        "zero frequency mode needs an invertible operator or mean-free forcing");
  }

  ParabolicResult out;
  out.condition = std::move(report);
  out.solution.u = apply_multiplier(syms.m0, f);
  out.solution.derived["u'"] = apply_multiplier(syms.m1, f);
  out.solution.derived["a1*u'"] = apply_multiplier(syms.m2, f);
  out.solution.derived["Au"] = apply_multiplier(syms.m3, f);
  out.solution.derived["b1*Au"] = apply_multiplier(syms.m4, f);

  GridFunction lu = apply_multiplier(forward_parabolic(coeffs, A), out.solution.u);
  out.solution.residual = relative_l2(lu, f);

  CoerciveReport& c = out.coercive;
  c.norm_u_prime = lp_norm(out.solution.derived.at("u'"), p);
  c.norm_conv_u_prime = lp_norm(out.solution.derived.at("a1*u'"), p);
  c.norm_Au = lp_norm(out.solution.derived.at("Au"), p);
  c.norm_conv_Au = lp_norm(out.solution.derived.at("b1*Au"), p);
  c.norm_f = lp_norm(f, p);
  if (c.norm_f > 0.0) {
    c.ratio_C = (c.norm_u_prime + c.norm_conv_u_prime + c.norm_Au + c.norm_conv_Au) / c.norm_f;
  }
  return out;
}

}  // namespace

ParabolicResult solve_parabolic(const ParabolicCoefficients& coeffs,
                                const SectorialOperator& A, const GridFunction& f, double p,
                                bool reuse_factorizations) {
  require_shape(A, f, 1);
  ConditionReport report =
      check_condition_4_1(coeffs, A.sector_angle(), default_xi_sample(1));
  if (!report.overall) throw ConditionFailure(report);
  ParabolicSymbols syms = parabolic_symbols(coeffs, A, reuse_factorizations);
  return parabolic_solve_with(syms, coeffs, A, f, p, std::move(report));
}

CauchyResult solve_cauchy(const SectorialOperator& A, const GridFunction& f, double q,
                          double theta) {
  require_shape(A, f, 1);
  if (!(q > 1.0) || !std::isfinite(q))
    throw std::invalid_argument("exponent q must be finite and above one");
  if (!(theta >= q) || !std::isfinite(theta))
    throw std::invalid_argument("theta must be finite and at least q");
  if (!A.is_invertible())
    throw std::invalid_argument("the causal problem needs an invertible operator");

  const Grid& g = f.grid;
  double peak = peak_magnitude(f);
  double worst_neg = 0.0;
  for (std::size_t j = 0; j < g.num_nodes(); ++j) {
    if (g.node(static_cast<int>(j)) < 0.0) {
      worst_neg = std::max(worst_neg, f.vec(j).cwiseAbs().maxCoeff());
    }
  }
  if (worst_neg > 1e-12 * peak)
    throw std::invalid_argument("forcing must vanish for t < 0");

  // doubled box: the periodic image of the solution tail stays clear of
  // the causal window
  Grid big = make_grid(1, 2 * g.n, 2.0 * g.box);
  GridFunction fb = make_function(big, f.e_dim);
  for (std::size_t j = 0; j < g.num_nodes(); ++j) {
    fb.vec(j + static_cast<std::size_t>(g.n)) = f.vec(j);
  }

  CauchySymbols syms = cauchy_symbols(A, true);
  GridFunction ub = apply_multiplier(syms.m0, fb);
  GridFunction upb =
      scale_spectrum(ub, [](const std::vector<double>& xi) { return Complex(0.0, xi[0]); });
  GridFunction aub = matrix_apply(A.matrix(), ub);

  GridFunction lhs = upb;
  for (std::size_t i = 0; i < lhs.values.size(); ++i) lhs.values[i] += aub.values[i];
  double residual = relative_l2(lhs, fb);

  GridFunction sb = semigroup_convolution(A, fb);

  auto take = [&](const GridFunction& bigf) {
    GridFunction out = make_function(g, f.e_dim);
    for (std::size_t j = 0; j < g.num_nodes(); ++j) {
      if (g.node(static_cast<int>(j)) < 0.0) {
        out.vec(j).setZero();
      } else {
        out.vec(j) = bigf.vec(j + static_cast<std::size_t>(g.n));
      }
    }
    return out;
  };

  CauchyResult out;
  out.solution.u = take(ub);
  out.solution.derived["u'"] = take(upb);
  out.solution.derived["Au"] = take(aub);
  out.solution.residual = residual;
  out.semigroup_u = take(sb);
  out.discrepancy = relative_l2(out.solution.u, out.semigroup_u);

  std::vector<double> thetas{q, theta, 2.0 * q};
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());
  double nf = lp_norm(f, q);
  for (double th : thetas) {
    out.theta_ratios.emplace_back(th, nf > 0.0 ? lp_norm(out.solution.u, th) / nf : 0.0);
  }
  return out;
}

Solution solve_elliptic_doe(const SectorialOperator& A, const GridFunction& f) {
  require_shape(A, f, 1);
  CauchySymbols syms = cauchy_symbols(A, true);
  if (!syms.sigma0.zero_value.has_value() && !effectively_mean_free(f)) {
    throw std::invalid_argument(
        "zero frequency mode needs an invertible operator or mean-free forcing");
  }

  Solution out;
  out.u = apply_multiplier(syms.sigma0, f);
  GridFunction uprime = apply_multiplier(syms.sigma1, f);
  for (auto& v : uprime.values) v *= Complex(0.0, 1.0);
  GridFunction usecond = apply_multiplier(syms.sigma2, f);
  for (auto& v : usecond.values) v = -v;
  out.derived["u'"] = std::move(uprime);
  out.derived["u''"] = std::move(usecond);
  out.derived["Au"] = apply_multiplier(syms.sigma3, f);

  GridFunction curv =
      scale_spectrum(out.u, [](const std::vector<double>& xi) { return -xi[0] * xi[0]; });
  GridFunction lhs = matrix_apply(A.matrix(), out.u);
  for (std::size_t i = 0; i < lhs.values.size(); ++i) lhs.values[i] -= curv.values[i];
  out.residual = relative_l2(lhs, f);
  return out;
}

GridFunction semigroup_convolution(const SectorialOperator& A, const GridFunction& f) {
  require_shape(A, f, 1);
  GridFunction F = dft(f);
  double h = f.grid.spacing();
  std::array<GridFunction, 5> shifted;
  for (int i = 0; i < 5; ++i) {
    GridFunction Fi = F;
    double offset = h * kGaussNode[i];
    for (std::size_t j = 0; j < F.grid.num_nodes(); ++j) {
      Complex phase = std::exp(Complex(0.0, F.grid.freq_point(j)[0] * offset));
      Fi.vec(j) = (phase * Fi.vec(j)).eval();
    }
    shifted[i] = idft(Fi);
  }
  return march_semigroup(A, f.grid, f.e_dim, [&](std::size_t j, int i) {
    return Eigen::VectorXcd(shifted[static_cast<std::size_t>(i)].vec(j));
  });
}

GridFunction semigroup_convolution(const SectorialOperator& A, const Grid& grid, int e_dim,
                                   const std::function<Eigen::VectorXcd(double)>& f) {
  if (grid.dim != 1) throw std::invalid_argument("marching needs a one-dimensional grid");
  if (e_dim != A.dim()) throw std::invalid_argument("value and operator dimensions differ");
  double h = grid.spacing();
  return march_semigroup(A, grid, e_dim, [&](std::size_t j, int i) {
    return f(grid.node(static_cast<int>(j)) + h * kGaussNode[static_cast<std::size_t>(i)]);
  });
}

std::string FadingMemoryReport::text() const {
  std::ostringstream os;
  os << "fading memory ensemble: " << members.size() << " members, " << excluded
     << " excluded\n";
  os << "hypothesis check: " << (condition.overall ? "pass" : "FAIL") << "\n";
  os << "max ratio_C = " << format_double(max_ratio)
     << ", median ratio_C = " << format_double(median_ratio) << "\n";
  return os.str();
}

std::string FadingMemoryReport::csv() const {
  std::ostringstream os;
  os << "member_seed,residual,norm_u_prime,norm_conv_u_prime,norm_Au,norm_conv_Au,norm_f,"
        "ratio_C\n";
  for (const auto& m : members) {
    os << m.seed << ',' << format_double(m.residual) << ',' << format_double(m.norm_u_prime)
       << ',' << format_double(m.norm_conv_u_prime) << ',' << format_double(m.norm_Au) << ','
       << format_double(m.norm_conv_Au) << ',' << format_double(m.norm_f) << ',';
    if (m.ratio_C) os << format_double(*m.ratio_C);
    os << '\n';
  }
  return os.str();
}

FadingMemoryReport demo_fading_memory(double m, double k, double c, const Grid& grid_t,
                                      int n_x, double p, double q_spatial, int ensemble_size,
                                      std::uint64_t seed, bool reuse_factorizations) {
  if (!(m > 0.0) || !(k > 0.0) || !(c > 0.0))
    throw std::invalid_argument("kernel decays and the shift must be positive");
  if (n_x < 1) throw std::invalid_argument("need at least one interior space node");
  if (ensemble_size < 1) throw std::invalid_argument("ensemble needs at least one member");
  if (grid_t.dim != 1) throw std::invalid_argument("time grid must be one-dimensional");

  SectorialOperator A = build_dirichlet_laplacian(n_x, kPi, c);
  ParabolicCoefficients co;
  co.a0 = 1.0;
  co.a1 = Kernel::exponential(m);
  co.b0 = 1.0;
  co.b1 = Kernel::exponential(k);

  FadingMemoryReport rep;
  rep.condition = check_condition_4_1(co, A.sector_angle(), default_xi_sample(1));
  if (!rep.condition.overall) throw ConditionFailure(rep.condition);

  // one symbol family for the whole ensemble: the resolvent shifts depend
  // only on the frequency, so later members hit the same store
  ParabolicSymbols syms = parabolic_symbols(co, A, reuse_factorizations);
  int band = std::min(64, grid_t.n / 4);
  double wx = kPi / (n_x + 1);
  std::vector<double> ratios;
  for (int i = 0; i < ensemble_size; ++i) {
    std::uint64_t member_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    GridFunction f = random_band_limited(grid_t, n_x, band, member_seed);
    auto res = parabolic_solve_with(syms, co, A, f, p, rep.condition);
    MemberRecord rec;
    rec.seed = member_seed;
    rec.residual = res.solution.residual;
    rec.norm_u_prime = lp_norm_mixed(res.solution.derived.at("u'"), p, q_spatial, wx);
    rec.norm_conv_u_prime = lp_norm_mixed(res.solution.derived.at("a1*u'"), p, q_spatial, wx);
    rec.norm_Au = lp_norm_mixed(res.solution.derived.at("Au"), p, q_spatial, wx);
    rec.norm_conv_Au = lp_norm_mixed(res.solution.derived.at("b1*Au"), p, q_spatial, wx);
    rec.norm_f = lp_norm_mixed(f, p, q_spatial, wx);
    if (rec.norm_f > 0.0) {
      rec.ratio_C =
          (rec.norm_u_prime + rec.norm_conv_u_prime + rec.norm_Au + rec.norm_conv_Au) /
          rec.norm_f;
      ratios.push_back(*rec.ratio_C);
    } else {
      ++rep.excluded;
    }
    rep.members.push_back(std::move(rec));
  }
  for (double r : ratios) rep.max_ratio = std::max(rep.max_ratio, r);
  rep.median_ratio = median_of(ratios);
  return rep;
}

std::string DiffusionReport::text() const {
  std::ostringstream os;
  os << "diffusion system truncated at K = " << truncation << "\n";
  os << "norm_u = " << format_double(norm_u) << ", norm_f = " << format_double(norm_f);
  if (ratio) os << ", ratio = " << format_double(*ratio);
  os << "\n";
  os << "dual path discrepancy = " << format_double(discrepancy) << "\n";
  return os.str();
}

std::string DiffusionReport::csv() const {
  std::ostringstream os;
  os << "component,norm_u\n";
  for (std::size_t i = 0; i < component_norms.size(); ++i) {
    os << i << ',' << format_double(component_norms[i]) << '\n';
  }
  return os.str();
}

DiffusionReport demo_diffusion_system(int K, double c, const Grid& grid_t, int n_x,
                                      double p_inner, double q,
                                      std::optional<GridFunction> forcing,
                                      std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("need at least one component");
  if (!(c > 0.0)) throw std::invalid_argument("the shift must be positive");
  if (n_x < 1) throw std::invalid_argument("need at least one interior space node");
  if (grid_t.dim != 1) throw std::invalid_argument("time grid must be one-dimensional");
  double unknowns = static_cast<double>(K) * n_x * static_cast<double>(grid_t.num_nodes());
  if (unknowns > 1e7) throw std::invalid_argument("truncated system exceeds the memory budget");

  SectorialOperator stencil = build_dirichlet_laplacian(n_x, kPi, c);
  int e_dim = K * n_x;
  Eigen::MatrixXcd blocks = Eigen::MatrixXcd::Zero(e_dim, e_dim);
  for (int b = 0; b < K; ++b) {
    blocks.block(b * n_x, b * n_x, n_x, n_x) = stencil.matrix();
  }
  SectorialOperator A(blocks, stencil.sector_angle());

  GridFunction f;
  if (forcing) {
    f = std::move(*forcing);
    if (f.e_dim != e_dim) throw std::invalid_argument("forcing components do not match K");
    if (f.grid.n != grid_t.n || f.grid.box != grid_t.box || f.grid.dim != grid_t.dim)
      throw std::invalid_argument("forcing grid does not match the time grid");
  } else {
    f = default_causal_forcing(grid_t, e_dim, seed);
  }

  auto res = solve_cauchy(A, f, q, 2.0 * q);
  DiffusionReport rep;
  rep.truncation = K;
  rep.discrepancy = res.discrepancy;
  rep.solution = std::move(res.solution);
  double wx = kPi / (n_x + 1);
  rep.norm_u = lp_norm_mixed(rep.solution.u, q, p_inner, wx);
  rep.norm_f = lp_norm_mixed(f, q, p_inner, wx);
  if (rep.norm_f > 0.0) rep.ratio = rep.norm_u / rep.norm_f;
  for (int b = 0; b < K; ++b) {
    rep.component_norms.push_back(
        lp_norm_mixed(slice_components(rep.solution.u, b * n_x, n_x), q, p_inner, wx));
  }
  return rep;
}

std::string SobolevReport::text() const {
  std::ostringstream os;
  os << "measured ratio = " << format_double(base_ratio) << " (base grid)\n";
  os << "refined grid ratio = " << format_double(grid_refined_ratio) << "\n";
  os << "refined box ratio = " << format_double(box_refined_ratio) << "\n";
  os << "drift = " << format_double(drift) << ", stable: " << (stable ? "yes" : "no") << "\n";
  return os.str();
}

SobolevReport verify_sobolev(const EllipticCoefficients& coeffs, const SectorialOperator& A,
                             double q, double p, int ensemble_size, std::uint64_t seed,
                             const Grid& grid) {
  if (ensemble_size < 1) throw std::invalid_argument("ensemble needs at least one member");
  if (coeffs.dim != grid.dim) throw std::invalid_argument("coefficient and grid dimensions differ");
  require_gap(q, p, grid.dim);

  // wave-packet parameters drawn once, relative to the base box, so every
  // refinement samples the same continuous states
  struct Packet {
    double amp, ctr, wid, freq, phase;
  };
  int e_dim = A.dim();
  int d = grid.dim;
  double L0 = grid.box;
  std::vector<std::vector<std::array<Packet, 2>>> members(
      static_cast<std::size_t>(ensemble_size));
  for (int i = 0; i < ensemble_size; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> amp(0.5, 1.5), ctr(-0.125, 0.125),
        wid(0.03, 0.075), freq(0.5, 3.0), phase(0.0, 2.0 * kPi);
    auto& packets = members[static_cast<std::size_t>(i)];
    for (int c = 0; c < e_dim; ++c) {
      for (int b = 0; b < 3; ++b) {
        std::array<Packet, 2> axes{};
        for (int ax = 0; ax < d; ++ax) {
          axes[static_cast<std::size_t>(ax)] =
              Packet{amp(rng), ctr(rng) * L0, wid(rng) * L0, freq(rng), phase(rng)};
        }
        packets.push_back(axes);
      }
    }
  }

  MultiplierSymbol forward = forward_elliptic(coeffs, A);
  auto measure = [&](const Grid& g) {
    double worst = 0.0;
    for (int i = 0; i < ensemble_size; ++i) {
      const auto& packets = members[static_cast<std::size_t>(i)];
      GridFunction u = make_function(g, e_dim);
      for (std::size_t j = 0; j < g.num_nodes(); ++j) {
        std::vector<double> t = g.node_point(j);
        for (int c = 0; c < e_dim; ++c) {
          Complex acc = 0.0;
          for (int b = 0; b < 3; ++b) {
            const auto& axes = packets[static_cast<std::size_t>(c * 3 + b)];
            double val = 1.0;
            for (int ax = 0; ax < d; ++ax) {
              const Packet& pk = axes[static_cast<std::size_t>(ax)];
              double x = t[static_cast<std::size_t>(ax)] - pk.ctr;
              val *= pk.amp * std::exp(-x * x / (2.0 * pk.wid * pk.wid)) *
                     std::cos(pk.freq * t[static_cast<std::size_t>(ax)] + pk.phase);
            }
            acc += val;
          }
          u.at(j)[c] = acc;
        }
      }
      GridFunction f = apply_multiplier(forward, u);
      double nf = lp_norm(f, q);
      if (nf > 0.0) worst = std::max(worst, lp_norm(u, p) / nf);
    }
    return worst;
  };

  SobolevReport rep;
  rep.base_ratio = measure(grid);
  rep.grid_refined_ratio = measure(make_grid(d, 2 * grid.n, grid.box));
  rep.box_refined_ratio = measure(make_grid(d, 2 * grid.n, 2.0 * grid.box));
  if (rep.base_ratio > 0.0) {
    rep.drift = std::max(std::abs(rep.grid_refined_ratio - rep.base_ratio),
                         std::abs(rep.box_refined_ratio - rep.base_ratio)) /
                rep.base_ratio;
  }
  rep.stable = rep.drift < 0.05;
  return rep;
}

std::string GrowthReport::text() const {
  std::ostringstream os;
  for (const auto& [t, w] : table) {
    os << "T = " << format_double(t) << "  sup = " << format_double(w) << "\n";
  }
  os << "slope = " << format_double(slope) << "\n";
  return os.str();
}

GrowthReport negative_test_m1(const SectorialOperator& A, double q, double theta,
                              const std::vector<double>& T_list) {
  if (!(q > 1.0) || !std::isfinite(q))
    throw std::invalid_argument("exponent q must be finite and above one");
  if (!(theta >= q) || !std::isfinite(theta))
    throw std::invalid_argument("theta must be finite and at least q");
  if (T_list.empty()) throw std::invalid_argument("need at least one horizon");
  if (!(T_list.front() > 0.0)) throw std::invalid_argument("horizons must be positive");
  for (std::size_t i = 1; i < T_list.size(); ++i) {
    if (!(T_list[i] > T_list[i - 1]))
      throw std::invalid_argument("horizons must strictly increase");
  }

  double gamma = 1.0 / q - 1.0 / theta;
  GrowthReport rep;
  for (double T : T_list) {
    double sup = 0.0;
    for (int j = 0;; ++j) {
      double t = T * std::pow(10.0, -j / 40.0);
      if (t < 1e-2) break;
      for (double sign : {1.0, -1.0}) {
        double nrm = operator_norm_2(A.shifted_inverse(Complex(0.0, sign * t)));
        sup = std::max(sup, std::pow(t, 1.0 + gamma) * nrm);
      }
    }
    rep.table.emplace_back(T, sup);
  }

  std::size_t n = rep.table.size();
  if (n >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [t, w] : rep.table) {
      double x = std::log10(t), y = std::log10(w);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double denom = static_cast<double>(n) * sxx - sx * sx;
    rep.slope = denom != 0.0 ? (static_cast<double>(n) * sxy - sx * sy) / denom : 0.0;
  }
  return rep;
}

}  // namespace coe
