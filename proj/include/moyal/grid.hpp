#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace moyal {

using cplx = std::complex<double>;

/// Periodic box [-L, L)^n sampled with N points per axis.
///
/// Positions are x_j = -L + j h with h = 2L/N; the dual lattice is
/// xi_k = (pi/L) k for k in [-N/2, N/2).  Storage is row-major with axis 0
/// slowest, for both position samples and (centered) frequency samples.
struct GridSpec {
  int n = 1;
  double L = 12.0;
  int N = 128;

  /// Upper bound on N^n accepted by validate().
  static constexpr std::int64_t kMaxSamples = std::int64_t{1} << 22;

  void validate() const;
  std::int64_t size() const;
  double spacing() const { return 2.0 * L / N; }
  double dual_step() const;
  double cell_volume() const;       // h^n
  double dual_cell_volume() const;  // (pi/L)^n

  /// Multi-index (per-axis 0..N-1) of a flat index.
  void unflatten(std::int64_t flat, std::span<int> idx) const;
  std::int64_t flatten(std::span<const int> idx) const;

  Eigen::VectorXd point(std::int64_t flat) const;
  /// Frequency xi_k at flat centered index.
  Eigen::VectorXd frequency(std::int64_t flat) const;
  /// Integer lattice label k for flat centered index.
  Eigen::VectorXi frequency_label(std::int64_t flat) const;

  /// Lattice label of xi if it lies on the dual lattice (within tol in units of the step)
  /// and inside the stored band [-N/2, N/2).
  bool on_dual_lattice(const Eigen::VectorXd& xi, Eigen::VectorXi* label = nullptr, double tol = 1e-9) const;
  /// Same test without the band restriction (any integer label; phases alias mod N).
  bool on_dual_lattice_any(const Eigen::VectorXd& xi, Eigen::VectorXi* label = nullptr, double tol = 1e-9) const;
  /// True if the vector is an integer multiple of the grid spacing on every axis.
  bool on_position_lattice(const Eigen::VectorXd& a, Eigen::VectorXi* steps = nullptr, double tol = 1e-9) const;

  /// Box half-width making (1/2) sharp(xi) an exact grid shift for every lattice
  /// covector xi whenever all sigma entries are integer multiples of `quantum`.
  static GridSpec commensurate(int n, int N, double quantum);

  bool operator==(const GridSpec& o) const { return n == o.n && L == o.L && N == o.N; }
};

enum class Domain { position, frequency };

struct GridFunction {
  GridSpec spec;
  Domain domain = Domain::position;
  std::vector<cplx> values;

  GridFunction() = default;
  GridFunction(const GridSpec& s, Domain d);
  GridFunction(const GridSpec& s, Domain d, std::vector<cplx> v);

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
  double max_abs() const;
  double l2_norm() const;  // sqrt(sum |v|^2 * cell volume)

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(cplx s);
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx s, GridFunction a);
/// Pointwise product of two position-domain functions.
GridFunction pointwise_product(const GridFunction& a, const GridFunction& b);
/// Pointwise complex conjugate (the involution of the star algebra).
GridFunction conjugate(const GridFunction& f);
/// max |a - b|; requires matching spec and domain.
double max_abs_diff(const GridFunction& a, const GridFunction& b);

/// fcheck(xi) = (2 pi)^{-n} int f(x) e^{-i<xi,x>} dx as a Riemann sum on the grid.
GridFunction fourier_inverse(const GridFunction& f);
/// f(x) = sum_k fcheck(xi_k) e^{i<xi_k,x>} (pi/L)^n; exact inverse of fourier_inverse.
GridFunction fourier_forward(const GridFunction& fcheck);

/// In-place multidimensional DFT on raw samples (sign -1 forward, +1 backward, unnormalized).
void dft_inplace(const GridSpec& spec, std::span<cplx> data, int sign);

/// Spectral partial derivative d/dx^axis of a position-domain function.
GridFunction spectral_derivative(const GridFunction& f, std::span<const int> beta);
/// Multiplies a position-domain function by x^alpha.
GridFunction monomial_multiply(const GridFunction& f, std::span<const int> alpha);

/// Schwartz seminorm s_{p,q}(f) = sum_{|a|<=p, |b|<=q} max_grid |x^a d_b f|.
double seminorm(const GridFunction& f, int p, int q);
/// Riemann sum of |fcheck| with dual cell volume.
double l1_norm_freq(const GridFunction& fcheck);

/// All multi-indices of length n with |alpha| <= order, in graded lexicographic order.
std::vector<std::vector<int>> multi_indices(int n, int order);

/// prod_a exp(-(x_a - c_a)^2 / (2 w_a^2)).
GridFunction make_gaussian(const GridSpec& spec, const Eigen::VectorXd& center, const Eigen::VectorXd& widths);

/// Translates f by a: returns samples of f(x - a) using the Fourier phase ramp.
/// Integer multiples of the grid spacing reduce to an exact cyclic roll.
GridFunction translate(const GridFunction& f, const Eigen::VectorXd& a);
/// Same as translate, starting from a precomputed spectrum.
GridFunction translate_spectrum(const GridFunction& fcheck, const Eigen::VectorXd& a);

}  // namespace moyal
