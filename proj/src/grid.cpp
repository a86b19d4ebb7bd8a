#include "coe/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <random>
#include <stdexcept>

namespace coe {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Unnormalized c2c transform over the grid axes for every E-component.
void fft_axes(GridFunction& f, int sign) {
  const int n = f.grid.n;
  const int e = f.e_dim;
  const std::size_t total = f.values.size();
  fftw_complex* buf = fftw_alloc_complex(total);
  if (!buf) throw std::bad_alloc();
  std::memcpy(buf, f.values.data(), total * sizeof(fftw_complex));
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (f.grid.dim == 1) {
      plan = fftw_plan_many_dft(1, &n, e, buf, nullptr, e, 1, buf, nullptr, e, 1, sign,
                                FFTW_ESTIMATE);
    } else {
      int dims[2] = {n, n};
      plan = fftw_plan_many_dft(2, dims, e, buf, nullptr, e, 1, buf, nullptr, e, 1, sign,
                                FFTW_ESTIMATE);
    }
  }
  if (!plan) {
    fftw_free(buf);
    throw std::runtime_error("fft planning failed");
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::memcpy(f.values.data(), buf, total * sizeof(fftw_complex));
  fftw_free(buf);
}

// (-1)^{j_1 + ... + j_d} for the flat node index; carries the phase of the
// [-L, L) node offset so that coefficients line up with xi_k = pi k / L.
double checker_sign(const Grid& g, std::size_t flat) {
  if (g.dim == 1) return (flat & 1u) ? -1.0 : 1.0;
  std::size_t j2 = flat % g.nodes_per_axis();
  std::size_t j1 = flat / g.nodes_per_axis();
  return ((j1 + j2) & 1u) ? -1.0 : 1.0;
}

}  // namespace

std::size_t Grid::num_nodes() const {
  std::size_t m = nodes_per_axis();
  return dim == 1 ? m : m * m;
}

std::vector<int> Grid::axis_indices(std::size_t flat) const {
  if (dim == 1) return {static_cast<int>(flat)};
  return {static_cast<int>(flat / nodes_per_axis()), static_cast<int>(flat % nodes_per_axis())};
}

std::vector<double> Grid::node_point(std::size_t flat) const {
  auto idx = axis_indices(flat);
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = node(idx[i]);
  return out;
}

std::vector<double> Grid::freq_point(std::size_t flat) const {
  auto idx = axis_indices(flat);
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = frequency(idx[i]);
  return out;
}

Grid make_grid(int dim, int n, double box) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (!power_of_two(n) || n < 8)
    throw std::invalid_argument("grid size must be a power of two, at least 8");
  if (!(box > 0.0)) throw std::invalid_argument("grid box must be positive");
  return Grid{dim, n, box};
}

Grid parse_grid(std::string_view text) {
  auto fail = [&] { throw std::invalid_argument("bad grid spec: " + std::string(text)); };
  auto s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.substr(0, 5) != "grid(" || s.back() != ')') fail();
  auto body = s.substr(5, s.size() - 6);
  int dim = 0, n = 0;
  double box = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i < body.size() && body[i] != ',') continue;
    auto part = body.substr(start, i - start);
    start = i + 1;
    auto eq = part.find('=');
    if (eq == std::string_view::npos) fail();
    auto key = part.substr(0, eq);
    while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
    while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
    double value = parse_complex(part.substr(eq + 1)).real();
    if (key == "d") dim = static_cast<int>(value);
    else if (key == "N") n = static_cast<int>(value);
    else if (key == "L") box = value;
    else fail();
  }
  return make_grid(dim, n, box);
}

std::string format_grid(const Grid& g) {
  return "grid(d=" + std::to_string(g.dim) + ",N=" + std::to_string(g.n) +
         ",L=" + format_double(g.box) + ")";
}

GridFunction make_function(const Grid& g, int e_dim, Space space) {
  if (e_dim < 1) throw std::invalid_argument("e_dim must be positive");
  GridFunction f;
  f.grid = g;
  f.e_dim = e_dim;
  f.space = space;
  f.values.assign(g.num_nodes() * static_cast<std::size_t>(e_dim), Complex{0.0, 0.0});
  return f;
}

GridFunction dft(const GridFunction& f) {
  if (f.space != Space::physical) throw std::invalid_argument("dft expects physical data");
  GridFunction out = f;
  fft_axes(out, FFTW_FORWARD);
  const double scale = std::pow(out.grid.spacing(), out.grid.dim);
  for (std::size_t node = 0; node < out.grid.num_nodes(); ++node) {
    const double s = scale * checker_sign(out.grid, node);
    for (int c = 0; c < out.e_dim; ++c) out.at(node)[c] *= s;
  }
  out.space = Space::spectral;
  return out;
}

GridFunction idft(const GridFunction& f) {
  if (f.space != Space::spectral) throw std::invalid_argument("idft expects spectral data");
  GridFunction out = f;
  for (std::size_t node = 0; node < out.grid.num_nodes(); ++node) {
    const double s = checker_sign(out.grid, node);
    for (int c = 0; c < out.e_dim; ++c) out.at(node)[c] *= s;
  }
  fft_axes(out, FFTW_BACKWARD);
  const double scale = std::pow(2.0 * out.grid.box, -out.grid.dim);
  for (auto& v : out.values) v *= scale;
  out.space = Space::physical;
  return out;
}

namespace {

double inner_norm(const GridFunction& f, std::size_t node, double q, double w) {
  double acc = 0.0;
  if (q == 2.0 && w == 1.0) {
    for (int c = 0; c < f.e_dim; ++c) acc += std::norm(f.at(node)[c]);
    return std::sqrt(acc);
  }
  for (int c = 0; c < f.e_dim; ++c) acc += w * std::pow(std::abs(f.at(node)[c]), q);
  return std::pow(acc, 1.0 / q);
}

double norm_impl(const GridFunction& f, double p, double q_inner, double w_inner) {
  if (f.space != Space::physical)
    throw std::invalid_argument("norms are evaluated on physical data");
  if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("norm exponent must lie in (1, inf)");
  const double cell = std::pow(f.grid.spacing(), f.grid.dim);
  double acc = 0.0;
  for (std::size_t node = 0; node < f.grid.num_nodes(); ++node)
    acc += cell * std::pow(inner_norm(f, node, q_inner, w_inner), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

double lp_norm(const GridFunction& f, double p) { return norm_impl(f, p, 2.0, 1.0); }

double lp_norm_mixed(const GridFunction& f, double p, double q_inner, double w_inner) {
  if (!(q_inner >= 1.0) || !(w_inner > 0.0))
    throw std::invalid_argument("inner norm needs q >= 1 and positive weight");
  return norm_impl(f, p, q_inner, w_inner);
}

double spectral_l2_norm(const GridFunction& f) {
  if (f.space != Space::spectral)
    throw std::invalid_argument("spectral_l2_norm expects spectral data");
  double acc = 0.0;
  for (const auto& v : f.values) acc += std::norm(v);
  return std::sqrt(acc * std::pow(2.0 * f.grid.box, -f.grid.dim));
}

GridFunction random_band_limited(const Grid& g, int e_dim, int band, std::uint64_t seed) {
  if (band < 0 || band >= g.n / 2)
    throw std::invalid_argument("band must satisfy 0 <= band < n/2");
  auto spec = make_function(g, e_dim, Space::spectral);
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::normal_distribution<double> normal;
  const double amp = std::pow(2.0 * g.box, g.dim);
  auto natural = [&](int k) { return k >= 0 ? k : k + g.n; };
  if (g.dim == 1) {
    for (int k = -band; k <= band; ++k) {
      auto* slot = spec.at(natural(k));
      for (int c = 0; c < e_dim; ++c) slot[c] = amp * Complex{normal(rng), normal(rng)};
    }
  } else {
    for (int k1 = -band; k1 <= band; ++k1) {
      for (int k2 = -band; k2 <= band; ++k2) {
        std::size_t flat = static_cast<std::size_t>(natural(k1)) * g.nodes_per_axis() +
                           static_cast<std::size_t>(natural(k2));
        auto* slot = spec.at(flat);
        for (int c = 0; c < e_dim; ++c) slot[c] = amp * Complex{normal(rng), normal(rng)};
      }
    }
  }
  return idft(spec);
}

}  // namespace coe
