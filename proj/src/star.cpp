#include "moyal/star.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moyal/errors.hpp"
#include "moyal/kernels.hpp"

namespace moyal {

namespace {

void require_grid_pair(const StarContext& ctx, const GridFunction& f, const GridFunction& g) {
  const GridSpec& s = ctx.grid();
  if (!(f.spec == s) || !(g.spec == s)) throw ArgumentError("star product: inputs do not share the context grid");
  if (f.domain != Domain::position || g.domain != Domain::position)
    throw ArgumentError("star product: expected position samples");
  if (ctx.pvs.dim() != s.n) throw ArgumentError("star product: Poisson space and grid differ in dimension");
}

void require_axis(int n, int j) {
  if (j < 0 || j >= n) throw ArgumentError("axis index out of range");
}

bool use_left(const StarContext& ctx, size_t nf, size_t ng) {
  switch (ctx.route) {
    case StarRoute::left: return true;
    case StarRoute::right: return false;
    case StarRoute::automatic: break;
  }
  return nf <= ng;
}

}  // namespace

StarContext StarContext::flipped() const {
  StarContext c = *this;
  c.pvs = pvs.negated();
  return c;
}

const GridSpec& StarContext::grid() const {
  if (!spec) throw ArgumentError("star context has no grid");
  return *spec;
}

PlaneWaveSum star_exact(const StarContext& ctx, const PlaneWaveSum& f, const PlaneWaveSum& g) {
  const int n = ctx.pvs.dim();
  if (f.dim() != n || g.dim() != n) throw ArgumentError("star_exact: dimension mismatch");
  PlaneWaveSum out(n, std::min(f.tol(), g.tol()));
  const Eigen::MatrixXd& sigma = ctx.pvs.sigma();
  for (const auto& s : f.terms()) {
    const Eigen::VectorXd sx = sigma.transpose() * s.freq;  // sigma(xi, eta) = <eta, sigma^T xi>
    for (const auto& t : g.terms()) {
      const double ph = -0.5 * t.freq.dot(sx);
      out.add(s.coeff * t.coeff * std::polar(1.0, ph), s.freq + t.freq);
    }
  }
  return out;
}

std::vector<std::int64_t> retained_frequencies(const GridFunction& fcheck, double floor) {
  if (fcheck.domain != Domain::frequency) throw ArgumentError("retained_frequencies expects a spectrum");
  const double cut = floor * fcheck.max_abs();
  std::vector<std::int64_t> idx;
  for (std::int64_t m = 0; m < fcheck.size(); ++m)
    if (std::abs(fcheck.values[m]) > cut && fcheck.values[m] != cplx{0.0, 0.0}) idx.push_back(m);
  return idx;
}

GridFunction star_grid(const StarContext& ctx, const GridFunction& f, const GridFunction& g) {
  require_grid_pair(ctx, f, g);
  const GridSpec& s = ctx.grid();
  const GridFunction fc = fourier_inverse(f);
  const GridFunction gc = fourier_inverse(g);
  const auto rf = retained_frequencies(fc, ctx.spectral_floor);
  const auto rg = retained_frequencies(gc, ctx.spectral_floor);
  const bool left = use_left(ctx, rf.size(), rg.size());
  const auto& driver = left ? fc : gc;
  const auto& idx = left ? rf : rg;
  const double cell = s.dual_cell_volume();
  std::vector<kernels::ShiftTerm> terms;
  terms.reserve(idx.size());
  for (auto m : idx) {
    const Eigen::VectorXd xi = s.frequency(m);
    const Eigen::VectorXd half_shift = 0.5 * musical_sharp(ctx.pvs, xi);
    terms.push_back({driver.values[m] * cell, xi, left ? half_shift : Eigen::VectorXd(-half_shift)});
  }
  const GridFunction& other = left ? gc : fc;
  return ctx.parallel ? kernels::shift_accumulate_omp(other, terms) : kernels::shift_accumulate_serial(other, terms);
}

GridFunction star_twisted(const StarContext& ctx, const GridFunction& f, const GridFunction& g) {
  require_grid_pair(ctx, f, g);
  const GridSpec& s = ctx.grid();
  const GridFunction fc = fourier_inverse(f);
  const GridFunction gc = fourier_inverse(g);
  const auto rf = retained_frequencies(fc, ctx.spectral_floor);
  const auto rg = retained_frequencies(gc, ctx.spectral_floor);
  const bool left = use_left(ctx, rf.size(), rg.size());
  kernels::TwistedArgs args{&s, left ? fc.values : gc.values, left ? rf : rg, left ? gc.values : fc.values,
                            ctx.pvs.sigma(), left};
  GridFunction out(s, Domain::frequency);
  if (ctx.parallel)
    kernels::twisted_gather_omp(args, out.values);
  else
    kernels::twisted_gather_serial(args, out.values);
  return fourier_forward(out);
}

GridFunction star_mixed(const StarContext& ctx, const PlaneWaveSum& f, const GridFunction& g) {
  const GridSpec& s = ctx.grid();
  if (!(g.spec == s) || g.domain != Domain::position) throw ArgumentError("star_mixed: grid factor mismatch");
  if (f.dim() != s.n) throw ArgumentError("star_mixed: dimension mismatch");
  std::vector<kernels::ShiftTerm> terms;
  for (const auto& t : f.terms()) {
    if (!s.on_dual_lattice(t.freq)) throw CommensurabilityError("star_mixed: frequency off the dual lattice");
    terms.push_back({t.coeff, t.freq, 0.5 * musical_sharp(ctx.pvs, t.freq)});
  }
  const GridFunction gc = fourier_inverse(g);
  return ctx.parallel ? kernels::shift_accumulate_omp(gc, terms) : kernels::shift_accumulate_serial(gc, terms);
}

GridFunction star_mixed(const StarContext& ctx, const GridFunction& f, const PlaneWaveSum& g) {
  return star_mixed(ctx.flipped(), g, f);
}

PlaneWaveSum partial_deriv(const PlaneWaveSum& f, int j) {
  require_axis(f.dim(), j);
  PlaneWaveSum out(f.dim(), f.tol());
  for (const auto& t : f.terms()) out.add(t.coeff * cplx{0.0, t.freq(j)}, t.freq);
  return out;
}

GridFunction partial_deriv(const GridFunction& f, int j) {
  require_axis(f.spec.n, j);
  std::vector<int> beta(f.spec.n, 0);
  beta[j] = 1;
  return spectral_derivative(f, beta);
}

GridFunction x_multiply(const GridFunction& f, int j) {
  require_axis(f.spec.n, j);
  std::vector<int> alpha(f.spec.n, 0);
  alpha[j] = 1;
  return monomial_multiply(f, alpha);
}

PlaneWaveSum x_multiply(const PlaneWaveSum&, int) {
  throw UnsupportedRepresentation("x-multiplication leaves the span of plane waves");
}

PlaneWaveSum symplectic_gradient(const StarContext& ctx, const PlaneWaveSum& f, int j) {
  const int n = ctx.pvs.dim();
  require_axis(n, j);
  if (f.dim() != n) throw ArgumentError("symplectic_gradient: dimension mismatch");
  PlaneWaveSum out(n, f.tol());
  for (const auto& t : f.terms()) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += ctx.pvs.sigma()(j, k) * t.freq(k);
    // (i/2) sigma^{jk} (i xi_k) = -(1/2) sigma^{jk} xi_k
    out.add(-0.5 * s * t.coeff, t.freq);
  }
  return out;
}

GridFunction symplectic_gradient(const StarContext& ctx, const GridFunction& f, int j) {
  const int n = ctx.pvs.dim();
  require_axis(n, j);
  if (f.spec.n != n) throw ArgumentError("symplectic_gradient: dimension mismatch");
  GridFunction out(f.spec, Domain::position);
  for (int k = 0; k < n; ++k) {
    const double s = ctx.pvs.sigma()(j, k);
    if (s == 0.0) continue;
    out += cplx{0.0, 0.5 * s} * partial_deriv(f, k);
  }
  return out;
}

GridFunction x_alpha_d_beta(const GridFunction& f, std::span<const int> alpha, std::span<const int> beta) {
  return monomial_multiply(spectral_derivative(f, beta), alpha);
}

GridFunction nabla_power(const StarContext& ctx, const GridFunction& f, std::span<const int> gamma) {
  if (static_cast<int>(gamma.size()) != f.spec.n) throw ArgumentError("nabla_power: wrong multi-index length");
  GridFunction out = f;
  for (int j = 0; j < f.spec.n; ++j)
    for (int r = 0; r < gamma[j]; ++r) out = symplectic_gradient(ctx, out, j);
  return out;
}

GridFunction combined_expansion(const StarContext& ctx, const GridFunction& f, const GridFunction& g,
                                std::span<const int> alpha, std::span<const int> beta) {
  const int n = f.spec.n;
  if (static_cast<int>(alpha.size()) != n || static_cast<int>(beta.size()) != n)
    throw ArgumentError("combined_expansion: wrong multi-index length");
  auto binom = [](int a, int b) {
    double c = 1;
    for (int i = 0; i < b; ++i) c = c * (a - i) / (i + 1);
    return c;
  };
  // every c <= alpha and b1 <= beta, odometer style
  std::vector<int> c(n, 0), b1(n, 0), rest(n), b2(n);
  GridFunction out(f.spec, Domain::position);
  while (true) {
    double w = 1;
    for (int j = 0; j < n; ++j) {
      w *= binom(alpha[j], c[j]) * binom(beta[j], b1[j]);
      rest[j] = alpha[j] - c[j];
      b2[j] = beta[j] - b1[j];
    }
    const GridFunction left = nabla_power(ctx, spectral_derivative(f, b1), rest);
    out += cplx(w) * star_grid(ctx, left, x_alpha_d_beta(g, c, b2));
    int j = 0;
    for (; j < 2 * n; ++j) {
      int& d = j < n ? c[j] : b1[j - n];
      const int top = j < n ? alpha[j] : beta[j - n];
      if (++d <= top) break;
      d = 0;
    }
    if (j == 2 * n) break;
  }
  return out;
}

double smoothstep7(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double t4 = t * t * t * t;
  return t4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
}

GridFunction approx_identity(const GridSpec& spec, int k, double shell) {
  if (k < 0) throw ArgumentError("approx_identity: k must be nonnegative");
  if (!(shell > 0.0)) throw ArgumentError("approx_identity: shell width must be positive");
  const double r = k * spec.L / 8.0;
  if (r >= spec.L - 2.0 * shell)
    throw ArgumentError("approx_identity: plateau radius " + std::to_string(r) + " leaves no room for the shell");
  GridFunction out(spec, Domain::position);
  for (std::int64_t m = 0; m < spec.size(); ++m) {
    const double rho = spec.point(m).norm();
    out.values[m] = 1.0 - smoothstep7((rho - r) / shell);
  }
  return out;
}

}  // namespace moyal
