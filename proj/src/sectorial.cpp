#include "coe/sectorial.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <mutex>
#include <unordered_map>

namespace coe {

namespace {

constexpr double kRcondFloor = 1e-14;

struct ShiftKey {
  std::uint64_t re_bits;
  std::uint64_t im_bits;
  bool operator==(const ShiftKey&) const = default;
};

ShiftKey key_of(Complex lambda) {
  ShiftKey k{};
  double re = lambda.real(), im = lambda.imag();
  static_assert(sizeof(double) == sizeof(std::uint64_t));
  std::memcpy(&k.re_bits, &re, sizeof(double));
  std::memcpy(&k.im_bits, &im, sizeof(double));
  return k;
}

struct ShiftKeyHash {
  std::size_t operator()(const ShiftKey& k) const {
    std::uint64_t h = k.re_bits * 0x9e3779b97f4a7c15ull;
    h ^= k.im_bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

bool Sector::contains(Complex z, double tol) const {
  if (z == Complex{0.0, 0.0}) return true;
  return std::abs(std::arg(z)) <= angle + tol;
}

SingularResolvent::SingularResolvent(Complex l)
    : std::runtime_error("resolvent is singular at the shift " + format_complex(l)),
      lambda(l) {}

struct SectorialOperator::Impl {
  Eigen::MatrixXcd matrix;
  double angle = 0.0;
  std::optional<double> bound;

  mutable std::once_flag hermitian_once;
  mutable bool hermitian = false;
  mutable std::once_flag invertible_once;
  mutable bool invertible = false;
  mutable std::once_flag eig_once;
  mutable Eigen::MatrixXcd eigvecs;
  mutable Eigen::VectorXd eigvals;
  mutable bool eig_ok = false;

  void ensure_hermitian_flag() const {
    std::call_once(hermitian_once, [this] {
      double scale = matrix.cwiseAbs().maxCoeff() + 1.0;
      hermitian = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * scale;
    });
  }
  void ensure_invertible_flag() const {
    std::call_once(invertible_once, [this] {
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(matrix);
      invertible = lu.rcond() > kRcondFloor;
    });
  }
  void ensure_eig() const {
    std::call_once(eig_once, [this] {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix);
      eig_ok = es.info() == Eigen::Success;
      if (eig_ok) {
        eigvecs = es.eigenvectors();
        eigvals = es.eigenvalues();
      }
    });
  }
};

SectorialOperator::SectorialOperator(Eigen::MatrixXcd matrix, double sector_angle,
                                     std::optional<double> resolvent_bound) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1)
    throw std::invalid_argument("operator matrix must be square and non-empty");
  if (!(sector_angle >= 0.0) || sector_angle >= 3.141592653589793238)
    throw std::invalid_argument("sector angle must lie in [0, pi)");
  auto impl = std::make_shared<Impl>();
  impl->matrix = std::move(matrix);
  impl->angle = sector_angle;
  impl->bound = resolvent_bound;
  impl_ = std::move(impl);
}

SectorialOperator SectorialOperator::scalar(Complex a, double sector_angle) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = a;
  return SectorialOperator(std::move(m), sector_angle);
}

SectorialOperator SectorialOperator::diagonal(const std::vector<Complex>& entries,
                                              double sector_angle) {
  if (entries.empty()) throw std::invalid_argument("diagonal operator needs entries");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return SectorialOperator(std::move(m), sector_angle);
}

int SectorialOperator::dim() const { return static_cast<int>(impl_->matrix.rows()); }
const Eigen::MatrixXcd& SectorialOperator::matrix() const { return impl_->matrix; }
double SectorialOperator::sector_angle() const { return impl_->angle; }
std::optional<double> SectorialOperator::resolvent_bound() const { return impl_->bound; }

SectorialOperator SectorialOperator::with_bound(double bound) const {
  SectorialOperator copy = *this;
  auto impl = std::make_shared<Impl>();
  impl->matrix = impl_->matrix;
  impl->angle = impl_->angle;
  impl->bound = bound;
  copy.impl_ = std::move(impl);
  return copy;
}

bool SectorialOperator::is_invertible() const {
  impl_->ensure_invertible_flag();
  return impl_->invertible;
}

bool SectorialOperator::is_hermitian() const {
  impl_->ensure_hermitian_flag();
  return impl_->hermitian;
}

Eigen::VectorXcd SectorialOperator::apply(const Eigen::VectorXcd& v) const {
  if (v.size() != impl_->matrix.rows())
    throw std::invalid_argument("operator/vector dimension mismatch");
  return impl_->matrix * v;
}

namespace {

std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXcd>> factorize_shift(
    const Eigen::MatrixXcd& base, Complex lambda) {
  Eigen::MatrixXcd shifted = base;
  shifted.diagonal().array() += lambda;
  auto lu = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXcd>>(shifted);
  if (!(lu->rcond() > kRcondFloor)) throw SingularResolvent(lambda);
  return lu;
}

}  // namespace

Eigen::VectorXcd SectorialOperator::solve_shifted(Complex lambda, const Eigen::VectorXcd& b,
                                                  ResolventCache* cache) const {
  if (b.size() != impl_->matrix.rows())
    throw std::invalid_argument("operator/vector dimension mismatch");
  if (cache) return cache->factorization(lambda)->solve(b);
  return factorize_shift(impl_->matrix, lambda)->solve(b);
}

Eigen::MatrixXcd SectorialOperator::shifted_inverse(Complex lambda,
                                                    ResolventCache* cache) const {
  if (cache) return *cache->inverse(lambda);
  auto lu = factorize_shift(impl_->matrix, lambda);
  return lu->solve(Eigen::MatrixXcd::Identity(dim(), dim()));
}

Eigen::MatrixXcd SectorialOperator::semigroup_matrix(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup time must be nonnegative");
  if (is_hermitian()) {
    impl_->ensure_eig();
    if (impl_->eig_ok) {
      Eigen::VectorXcd damp =
          (-t * impl_->eigvals.array()).exp().matrix().cast<Complex>();
      return impl_->eigvecs * damp.asDiagonal() * impl_->eigvecs.adjoint();
    }
  }
  Eigen::MatrixXcd scaled = -t * impl_->matrix;
  return scaled.exp();
}

Eigen::VectorXcd SectorialOperator::semigroup_apply(double t, const Eigen::VectorXcd& b) const {
  if (b.size() != impl_->matrix.rows())
    throw std::invalid_argument("operator/vector dimension mismatch");
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup time must be nonnegative");
  if (is_hermitian()) {
    impl_->ensure_eig();
    if (impl_->eig_ok) {
      Eigen::VectorXcd coeffs = impl_->eigvecs.adjoint() * b;
      for (int i = 0; i < coeffs.size(); ++i) coeffs(i) *= std::exp(-t * impl_->eigvals(i));
      return impl_->eigvecs * coeffs;
    }
  }
  return semigroup_matrix(t) * b;
}

struct ResolventCache::State {
  SectorialOperator op;
  std::unordered_map<ShiftKey, std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXcd>>,
                     ShiftKeyHash>
      table;
  std::unordered_map<ShiftKey, std::shared_ptr<const Eigen::MatrixXcd>, ShiftKeyHash>
      inverse_table;
  mutable std::mutex mutex;
  std::atomic<std::size_t> hits{0};
  std::atomic<std::size_t> misses{0};
  explicit State(SectorialOperator o) : op(std::move(o)) {}
};

ResolventCache::ResolventCache(const SectorialOperator& op)
    : state_(std::make_shared<State>(op)) {}

std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXcd>> ResolventCache::factorization(
    Complex lambda) {
  const ShiftKey key = key_of(lambda);
  {
    std::lock_guard<std::mutex> lock(state_->mutex);
    auto it = state_->table.find(key);
    if (it != state_->table.end()) {
      state_->hits.fetch_add(1, std::memory_order_relaxed);
      return it->second;
    }
  }
  auto lu = factorize_shift(state_->op.matrix(), lambda);
  std::lock_guard<std::mutex> lock(state_->mutex);
  auto [it, inserted] = state_->table.emplace(key, lu);
  if (inserted) state_->misses.fetch_add(1, std::memory_order_relaxed);
  return it->second;
}

std::shared_ptr<const Eigen::MatrixXcd> ResolventCache::inverse(Complex lambda) {
  const ShiftKey key = key_of(lambda);
  {
    std::lock_guard<std::mutex> lock(state_->mutex);
    auto it = state_->inverse_table.find(key);
    if (it != state_->inverse_table.end()) {
      state_->hits.fetch_add(1, std::memory_order_relaxed);
      return it->second;
    }
  }
  auto lu = factorization(lambda);
  int n = state_->op.dim();
  auto inv = std::make_shared<const Eigen::MatrixXcd>(
      lu->solve(Eigen::MatrixXcd::Identity(n, n)));
  std::lock_guard<std::mutex> lock(state_->mutex);
  auto [it, inserted] = state_->inverse_table.emplace(key, std::move(inv));
  return it->second;
}

std::size_t ResolventCache::size() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return state_->table.size();
}
std::size_t ResolventCache::hits() const { return state_->hits.load(); }
std::size_t ResolventCache::misses() const { return state_->misses.load(); }

Eigen::VectorXcd resolvent_apply(const SectorialOperator& A, Complex lambda,
                                 const Eigen::VectorXcd& b, bool enforce_sector,
                                 ResolventCache* cache) {
  if (enforce_sector && !Sector{A.sector_angle()}.contains(lambda)) {
    throw std::domain_error("shift " + format_complex(lambda) +
                            " lies outside the operator sector");
  }
  return A.solve_shifted(lambda, b, cache);
}

PositivityReport check_positivity(const SectorialOperator& A, double angle,
                                  const std::vector<double>& radii, int angles_per_radius) {
  if (!(angle >= 0.0) || angle >= 3.141592653589793238)
    throw std::invalid_argument("sector angle must lie in [0, pi)");
  if (angles_per_radius < 8)
    throw std::invalid_argument("positivity check needs at least 8 angles per radius");
  if (radii.empty()) throw std::invalid_argument("positivity check needs radii");
  PositivityReport rep;
  rep.angle = angle;
  const double scale = A.matrix().cwiseAbs().maxCoeff() + 1.0;
  const int angle_count = angle == 0.0 ? 1 : angles_per_radius;
  for (double r : radii) {
    if (!(r > 0.0)) throw std::invalid_argument("positivity radii must be positive");
    for (int j = 0; j < angle_count; ++j) {
      double theta =
          angle_count == 1 ? 0.0 : -angle + 2.0 * angle * j / (angles_per_radius - 1);
      Complex lambda = std::polar(r, theta);
      Eigen::MatrixXcd shifted = A.matrix();
      shifted.diagonal().array() += lambda;
      double sigma = smallest_singular_value(shifted);
      ++rep.samples;
      if (sigma <= kRcondFloor * (scale + std::abs(lambda))) {
        rep.pass = false;
        rep.hit_singular = true;
        rep.worst_lambda = lambda;
        rep.measured_M = std::numeric_limits<double>::infinity();
        return rep;
      }
      double value = (1.0 + std::abs(lambda)) / sigma;
      if (value > rep.measured_M) {
        rep.measured_M = value;
        rep.worst_lambda = lambda;
      }
    }
  }
  rep.pass = true;
  return rep;
}

std::vector<double> default_positivity_radii() {
  std::vector<double> radii(40);
  for (int i = 0; i < 40; ++i) radii[i] = std::pow(10.0, -4.0 + 10.0 * i / 39.0);
  return radii;
}

double graph_norm(const SectorialOperator& A, const GridFunction& u, double p) {
  if (u.e_dim != A.dim()) throw std::invalid_argument("function/operator dimension mismatch");
  GridFunction Au = u;
  for (std::size_t node = 0; node < u.grid.num_nodes(); ++node) {
    Au.vec(node) = A.matrix() * u.vec(node);
  }
  double nu = lp_norm(u, p);
  double na = lp_norm(Au, p);
  return std::pow(std::pow(nu, p) + std::pow(na, p), 1.0 / p);
}

SectorialOperator build_dirichlet_laplacian(int n, double length, double shift_c,
                                            double sector_angle) {
  if (n < 1) throw std::invalid_argument("stencil needs at least one interior node");
  if (!(length > 0.0)) throw std::invalid_argument("interval length must be positive");
  const double h = length / (n + 1);
  const double w = 1.0 / (h * h);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = 2.0 * w + shift_c;
    if (i > 0) m(i, i - 1) = -w;
    if (i + 1 < n) m(i, i + 1) = -w;
  }
  return SectorialOperator(std::move(m), sector_angle);
}

double operator_norm_2(const Eigen::MatrixXcd& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

double smallest_singular_value(const Eigen::MatrixXcd& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace coe
