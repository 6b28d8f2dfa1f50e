#pragma once

#include <optional>

#include "moyal/grid.hpp"
#include "moyal/planewave.hpp"
#include "moyal/poisson.hpp"

namespace moyal {

enum class Backend { exact_planewave, grid, mixed };

/// Which factor's spectrum drives the grid product.
enum class StarRoute {
  automatic,  // the factor with fewer retained frequencies
  left,       // sum over xi in spec(f):  e^{i<xi,x>} g(x - sharp(xi)/2)
  right,      // sum over eta in spec(g): e^{i<eta,x>} f(x + sharp(eta)/2)
};

struct StarContext {
  PoissonVectorSpace pvs;
  Backend backend = Backend::exact_planewave;
  std::optional<GridSpec> spec;
  /// Spectral coefficients below floor * max|fcheck| are dropped.
  double spectral_floor = 1e-14;
  StarRoute route = StarRoute::automatic;
  /// Use the OpenMP kernels (the serial ones stay available for cross-checks).
  bool parallel = true;

  explicit StarContext(PoissonVectorSpace p) : pvs(std::move(p)) {}
  StarContext(PoissonVectorSpace p, const GridSpec& s, Backend b = Backend::grid)
      : pvs(std::move(p)), backend(b), spec(s) {}

  /// Same backend and grid with sigma replaced by -sigma.
  StarContext flipped() const;
  const GridSpec& grid() const;
};

/// (c e_xi) * (d e_eta) = c d exp(-(i/2) sigma(xi, eta)) e_{xi+eta}, extended bilinearly.
PlaneWaveSum star_exact(const StarContext& ctx, const PlaneWaveSum& f, const PlaneWaveSum& g);

/// Position-space route: phase-ramp shifts of one factor weighted by the other's spectrum.
GridFunction star_grid(const StarContext& ctx, const GridFunction& f, const GridFunction& g);
/// Spectral route: direct twisted convolution of the two spectra (reference).
GridFunction star_twisted(const StarContext& ctx, const GridFunction& f, const GridFunction& g);

/// e_xi * g = e^{i<xi,x>} g(x - sharp(xi)/2), one shift per term.
GridFunction star_mixed(const StarContext& ctx, const PlaneWaveSum& f, const GridFunction& g);
/// f * e_eta via the flip identity: f *_s g = g *_{-s} f.
GridFunction star_mixed(const StarContext& ctx, const GridFunction& f, const PlaneWaveSum& g);

/// Indices of the spectrum above floor * max; the list is in flat order.
std::vector<std::int64_t> retained_frequencies(const GridFunction& fcheck, double floor);

PlaneWaveSum partial_deriv(const PlaneWaveSum& f, int j);
GridFunction partial_deriv(const GridFunction& f, int j);
/// Multiplication by the coordinate x^j; only defined for grid data.
GridFunction x_multiply(const GridFunction& f, int j);
[[noreturn]] PlaneWaveSum x_multiply(const PlaneWaveSum& f, int j);
/// (i/2) sigma^{jk} d_k f.
PlaneWaveSum symplectic_gradient(const StarContext& ctx, const PlaneWaveSum& f, int j);
GridFunction symplectic_gradient(const StarContext& ctx, const GridFunction& f, int j);

/// Mixed derivative x^alpha d_beta f on the grid.
GridFunction x_alpha_d_beta(const GridFunction& f, std::span<const int> alpha, std::span<const int> beta);
/// Symplectic gradient power nabla^gamma f for a multi-index gamma.
GridFunction nabla_power(const StarContext& ctx, const GridFunction& f, std::span<const int> gamma);

/// Right-hand side of the combined rule
///   x^a d_b (f * g) = sum_{c <= a} sum_{b1 <= b} C(a,c) C(b,b1) (nabla^{a-c} d_{b1} f) * (x^c d_{b-b1} g),
/// from iterating the Leibniz rule and x^j (f * g) = f * (x^j g) + (nabla^j f) * g.
GridFunction combined_expansion(const StarContext& ctx, const GridFunction& f, const GridFunction& g,
                                std::span<const int> alpha, std::span<const int> beta);

/// Radial bump: 1 on |x| <= k L / 8, order-7 smoothstep decay to 0 over `shell` width.
GridFunction approx_identity(const GridSpec& spec, int k, double shell = 1.5);
/// The order-7 smoothstep S(t) = t^4 (35 - 84 t + 70 t^2 - 20 t^3), C^3 at both ends.
double smoothstep7(double t);

}  // namespace moyal
