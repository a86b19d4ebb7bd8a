#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "coe/util.hpp"

namespace coe {

/// Uniform periodic grid on [-L, L)^d with n nodes per axis (n a power of
/// two, n >= 8).  Node j sits at -L + j h with h = 2L/n; the discrete
/// frequencies are xi_k = pi k / L for k in [-n/2, n/2).
struct Grid {
  int dim = 1;
  int n = 8;
  double box = 1.0;

  double spacing() const { return 2.0 * box / n; }
  std::size_t nodes_per_axis() const { return static_cast<std::size_t>(n); }
  std::size_t num_nodes() const;
  double node(int j) const { return -box + j * spacing(); }
  int signed_index(int j) const { return j < n / 2 ? j : j - n; }
  double frequency(int j) const { return 3.14159265358979323846 * signed_index(j) / box; }
  /// Flat index decomposition, row-major over axes.
  std::vector<int> axis_indices(std::size_t flat) const;
  std::vector<double> node_point(std::size_t flat) const;
  std::vector<double> freq_point(std::size_t flat) const;
  std::size_t zero_frequency_node() const { return 0; }

  bool operator==(const Grid&) const = default;
};

Grid make_grid(int dim, int n, double box);
/// Grammar: grid(d=<1|2>, N=<power of two>, L=<float>)
Grid parse_grid(std::string_view text);
std::string format_grid(const Grid& g);

enum class Space { physical, spectral };

/// Sampled E-valued function.  Values are node-major: the E-vector of node
/// `j` occupies values[j*e_dim .. j*e_dim+e_dim).  Spectral data uses the
/// FFT's natural index order; Grid::signed_index maps an index to its mode.
struct GridFunction {
  Grid grid;
  int e_dim = 1;
  Space space = Space::physical;
  std::vector<Complex> values;

  Complex* at(std::size_t node) { return values.data() + node * e_dim; }
  const Complex* at(std::size_t node) const { return values.data() + node * e_dim; }
  Eigen::Map<Eigen::VectorXcd> vec(std::size_t node) {
    return {at(node), e_dim};
  }
  Eigen::Map<const Eigen::VectorXcd> vec(std::size_t node) const {
    return {at(node), e_dim};
  }
};

GridFunction make_function(const Grid& g, int e_dim, Space space = Space::physical);

/// Forward transform: coefficients h^d sum_j e^{-i xi_k . t_j} f(t_j), the
/// grid analogue of the continuum transform.  Exact inverse of idft.
GridFunction dft(const GridFunction& f);
/// Inverse transform carrying the (2L)^{-d} normalization.
GridFunction idft(const GridFunction& f);

/// Rectangle-rule L_p norm with the Euclidean E-norm, p in (1, inf).
double lp_norm(const GridFunction& f, double p);
/// Mixed variant: inner norm (sum_c w_inner |v_c|^q_inner)^{1/q_inner}.
double lp_norm_mixed(const GridFunction& f, double p, double q_inner, double w_inner);
/// Coefficient-side L_2 norm matching lp_norm(.,2) through the transform.
double spectral_l2_norm(const GridFunction& f);

/// Band-limited random function: independent complex-normal amplitudes on
/// the modes with |k| <= band per axis, identical for every n at fixed box.
GridFunction random_band_limited(const Grid& g, int e_dim, int band, std::uint64_t seed);

}  // namespace coe
