#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "moyal/errors.hpp"
#include "moyal/star.hpp"

using namespace moyal;
using std::numbers::pi;

namespace {

PlaneWaveSum random_pw(int n, int terms, std::mt19937_64& rng, double scale = 2.0) {
  std::normal_distribution<double> g;
  PlaneWaveSum s(n);
  for (int t = 0; t < terms; ++t) {
    Eigen::VectorXd xi(n);
    for (auto& x : xi) x = scale * g(rng);
    s.add({g(rng), g(rng)}, xi);
  }
  return s;
}

PlaneWaveSum random_lattice_pw(const GridSpec& s, int terms, int kmax, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> k(-kmax, kmax);
  std::normal_distribution<double> g;
  PlaneWaveSum p(s.n);
  for (int t = 0; t < terms; ++t) {
    Eigen::VectorXd xi(s.n);
    for (auto& x : xi) x = k(rng) * s.dual_step();
    p.add({g(rng), g(rng)}, xi);
  }
  return p;
}

GridFunction gaussian(const GridSpec& s, Eigen::VectorXd c, double w = 1.0) {
  return make_gaussian(s, c, Eigen::VectorXd::Constant(s.n, w));
}

double rel(const GridFunction& a, const GridFunction& b) {
  return max_abs_diff(a, b) / std::max(1.0, b.max_abs());
}

}  // namespace

TEST_CASE("star_exact examples") {
  const StarContext ctx(PoissonVectorSpace::plane(1.0));
  const auto p = star_exact(ctx, PlaneWaveSum::phase(Eigen::Vector2d(1, 0)), PlaneWaveSum::phase(Eigen::Vector2d(0, 1)));
  REQUIRE(p.size() == 1);
  CHECK(p.terms()[0].freq == Eigen::Vector2d(1, 1));
  CHECK(std::abs(p.terms()[0].coeff - std::polar(1.0, -0.5)) < 1e-15);

  std::mt19937_64 rng(1);
  const auto f = random_pw(2, 4, rng);
  CHECK(max_coeff_diff(star_exact(ctx, PlaneWaveSum::phase(Eigen::Vector2d::Zero()), f), f) < 1e-15);

  const StarContext flat(PoissonVectorSpace::trivial(2));
  const auto q = star_exact(flat, PlaneWaveSum::phase(Eigen::Vector2d(1, 2)), PlaneWaveSum::phase(Eigen::Vector2d(-3, 1)));
  CHECK(q.terms()[0].coeff == cplx(1.0, 0.0));
  CHECK(q.terms()[0].freq == Eigen::Vector2d(-2, 3));
}

TEST_CASE("exact backend: shift formula at a sampled point") {
  // (e_xi * f)(x) = e^{i<xi,x>} f(x - sharp(xi)/2), evaluated directly
  std::mt19937_64 rng(9);
  const StarContext ctx(PoissonVectorSpace::plane(0.7));
  const Eigen::Vector2d xi(0.4, -1.3);
  const auto f = random_pw(2, 5, rng);
  const auto prod = star_exact(ctx, PlaneWaveSum::phase(xi), f);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Vector2d x(std::normal_distribution<double>()(rng), std::normal_distribution<double>()(rng));
    const cplx direct = std::polar(1.0, xi.dot(x)) * f.eval(x - 0.5 * musical_sharp(ctx.pvs, xi));
    CHECK(std::abs(prod.eval(x) - direct) < 1e-12);
  }
}

TEST_CASE("exact backend algebra on random sums") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Random(3, 3);
    const StarContext ctx(PoissonVectorSpace(s - s.transpose()));
    const auto f = random_pw(3, 3, rng), g = random_pw(3, 3, rng), h = random_pw(3, 3, rng);
    CHECK(max_coeff_diff(star_exact(ctx, star_exact(ctx, f, g), h), star_exact(ctx, f, star_exact(ctx, g, h))) <
          1e-12);
    CHECK(max_coeff_diff(star_exact(ctx, g, f), star_exact(ctx.flipped(), f, g)) < 1e-12);
    CHECK(max_coeff_diff(star_exact(ctx, f, g).conjugate(), star_exact(ctx, g.conjugate(), f.conjugate())) < 1e-12);
    for (int j = 0; j < 3; ++j) {
      const auto lhs = partial_deriv(star_exact(ctx, f, g), j);
      const auto rhs = star_exact(ctx, partial_deriv(f, j), g) + star_exact(ctx, f, partial_deriv(g, j));
      CHECK(max_coeff_diff(lhs, rhs) < 1e-11);
    }
  }
}

TEST_CASE("plane-wave derivative calculus") {
  const auto e = PlaneWaveSum::phase(Eigen::Vector2d(1, 0));
  const auto d = partial_deriv(e, 0);
  CHECK(d.terms()[0].coeff == cplx(0, 1));
  CHECK(symplectic_gradient(StarContext(PoissonVectorSpace::trivial(2)), e, 1).terms()[0].coeff == cplx(0, 0));
  CHECK_THROWS_AS(x_multiply(e, 0), UnsupportedRepresentation);
}

TEST_CASE("grid star with sigma = 0 is the pointwise product") {
  const GridSpec s{2, 10.0, 64};
  const StarContext ctx(PoissonVectorSpace::trivial(2), s);
  const auto f = gaussian(s, Eigen::Vector2d(0.5, 0)), g = gaussian(s, Eigen::Vector2d(-0.3, 0.4), 0.8);
  CHECK(max_abs_diff(star_grid(ctx, f, g), pointwise_product(f, g)) < 1e-8);
}

TEST_CASE("grid star of on-lattice plane waves matches the exact backend") {
  std::mt19937_64 rng(3);
  const GridSpec s{2, 6.0, 32};
  const StarContext ctx(PoissonVectorSpace::plane(1.0), s);
  for (int t = 0; t < 5; ++t) {
    const auto f = random_lattice_pw(s, 3, 4, rng), g = random_lattice_pw(s, 3, 4, rng);
    const auto exact = sample_planewave(star_exact(ctx, f, g), s);
    CHECK(max_abs_diff(star_grid(ctx, sample_planewave(f, s), sample_planewave(g, s)), exact) < 1e-8);
    CHECK(max_abs_diff(star_twisted(ctx, sample_planewave(f, s), sample_planewave(g, s)), exact) < 1e-8);
  }
}

TEST_CASE("gaussian star product against a brute-force twisted convolution") {
  // oracle: double Riemann sum over a 32^2 frequency lattice of the closed-form spectra
  const double theta = 1.0;
  const GridSpec s{2, 12.0, 96};
  const StarContext ctx(PoissonVectorSpace::plane(theta), s);
  const auto f = gaussian(s, Eigen::Vector2d::Zero());
  const auto prod = star_grid(ctx, f, f);

  const int M = 32;
  const double step = 0.5, lo = -8.0;
  std::vector<Eigen::Vector2d> xs;
  std::vector<double> w;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      const Eigen::Vector2d xi(lo + a * step, lo + b * step);
      xs.push_back(xi);
      w.push_back(std::exp(-0.5 * xi.squaredNorm()) / (2 * pi) * step * step);
    }
  double err = 0.0;
  for (std::int64_t m = 0; m < s.size(); m += 997) {
    const Eigen::Vector2d x = s.point(m);
    if (x.norm() > 4) continue;
    cplx acc = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
      for (size_t j = 0; j < xs.size(); ++j) {
        const double sig = theta * (xs[i](0) * xs[j](1) - xs[i](1) * xs[j](0));
        acc += w[i] * w[j] * std::polar(1.0, -0.5 * sig + (xs[i] + xs[j]).dot(x));
      }
    err = std::max(err, std::abs(prod.values[m] - acc));
  }
  CHECK(err < 1e-6);

  // closed form for symmetric Gaussians: e^{-|x|^2/2} * e^{-|x|^2/2} = (1/(1+t^2/4)) e^{-|x|^2/(1+t^2/4)}
  const double c = 1.0 + theta * theta / 4.0;
  double cf = 0.0;
  for (std::int64_t m = 0; m < s.size(); ++m) {
    const double r2 = s.point(m).squaredNorm();
    cf = std::max(cf, std::abs(prod.values[m] - std::exp(-r2 / c) / c));
  }
  CHECK(cf < 1e-10);
}

TEST_CASE("routes and kernels agree") {
  const GridSpec s = GridSpec::commensurate(2, 64, 0.5);
  StarContext ctx(PoissonVectorSpace::plane(0.5), s);
  const auto f = gaussian(s, Eigen::Vector2d(0.3, -0.2), 0.8);
  const auto g = pointwise_product(gaussian(s, Eigen::Vector2d(-0.4, 0.1), 1.1),
                                   sample_planewave(PlaneWaveSum::phase(s.dual_step() * Eigen::Vector2d(2, 1)), s));
  const auto ref = star_twisted(ctx, f, g);
  for (auto route : {StarRoute::left, StarRoute::right}) {
    for (bool par : {false, true}) {
      StarContext c = ctx;
      c.route = route;
      c.parallel = par;
      CHECK(rel(star_grid(c, f, g), ref) < 1e-10);
      CHECK(rel(star_twisted(c, f, g), ref) < 1e-10);
    }
  }
  // the serial and OpenMP twisted kernels do the same arithmetic
  StarContext a = ctx, b = ctx;
  a.parallel = false;
  CHECK(max_abs_diff(star_twisted(a, f, g), star_twisted(b, f, g)) == 0.0);

  // non-commensurate grid: shifts go through phase ramps
  const GridSpec t{2, 9.0, 64};
  const StarContext ct(PoissonVectorSpace::plane(0.73), t);
  const auto ft = gaussian(t, Eigen::Vector2d(0.3, -0.2), 0.8), gt = gaussian(t, Eigen::Vector2d(-0.1, 0.5));
  CHECK(rel(star_grid(ct, ft, gt), star_twisted(ct, ft, gt)) < 1e-10);
}

TEST_CASE("mixed products") {
  const GridSpec s{2, 10.0, 64};
  const StarContext ctx(PoissonVectorSpace::plane(1.0), s);
  const auto g = gaussian(s, Eigen::Vector2d(0.1, 0.2));
  CHECK(max_abs_diff(star_mixed(ctx, PlaneWaveSum::phase(Eigen::Vector2d::Zero()), g), g) < 1e-14);

  const StarContext flat(PoissonVectorSpace::trivial(2), s);
  const Eigen::Vector2d xi = s.dual_step() * Eigen::Vector2d(3, -1);
  const auto e = PlaneWaveSum::phase(xi);
  CHECK(max_abs_diff(star_mixed(flat, e, g), pointwise_product(sample_planewave(e, s), g)) < 1e-13);

  const auto e1 = PlaneWaveSum::phase(Eigen::Vector2d(s.dual_step() * 2, 0));
  CHECK(max_abs_diff(star_mixed(ctx, e1, g), star_grid(ctx, sample_planewave(e1, s), g)) < 1e-10);
  CHECK(max_abs_diff(star_mixed(ctx, g, e1), star_grid(ctx, g, sample_planewave(e1, s))) < 1e-10);
  CHECK_THROWS_AS(star_mixed(ctx, PlaneWaveSum::phase(Eigen::Vector2d(0.1234, 0)), g), CommensurabilityError);
}

TEST_CASE("grid algebra: associativity, flip, involution") {
  const GridSpec s{2, 10.0, 64};
  const StarContext ctx(PoissonVectorSpace::plane(1.0), s);
  const auto f = gaussian(s, Eigen::Vector2d(0.5, 0), 0.9);
  const auto g = gaussian(s, Eigen::Vector2d(0, -0.5), 1.0);
  const auto h = pointwise_product(gaussian(s, Eigen::Vector2d(0.2, 0.2), 1.1),
                                   sample_planewave(PlaneWaveSum::phase(s.dual_step() * Eigen::Vector2d(1, 0)), s));
  CHECK(rel(star_grid(ctx, star_grid(ctx, f, g), h), star_grid(ctx, f, star_grid(ctx, g, h))) < 1e-8);
  CHECK(rel(star_grid(ctx, g, f), star_grid(ctx.flipped(), f, g)) < 1e-10);
  CHECK(rel(conjugate(star_grid(ctx, f, h)), star_grid(ctx, conjugate(h), conjugate(f))) < 1e-10);
}

TEST_CASE("leibniz and x-multiplication on the grid") {
  const GridSpec s{2, 10.0, 64};
  const StarContext ctx(PoissonVectorSpace::plane(1.0), s);
  const auto f = pointwise_product(gaussian(s, Eigen::Vector2d(0.3, 0), 0.9),
                                   sample_planewave(PlaneWaveSum::phase(s.dual_step() * Eigen::Vector2d(2, -1)), s));
  const auto g = gaussian(s, Eigen::Vector2d(-0.2, 0.4), 1.0);
  for (int j = 0; j < 2; ++j) {
    const auto lhs = partial_deriv(star_grid(ctx, f, g), j);
    const auto rhs = star_grid(ctx, partial_deriv(f, j), g) + star_grid(ctx, f, partial_deriv(g, j));
    CHECK(rel(lhs, rhs) < 1e-8);
    const auto xl = x_multiply(star_grid(ctx, f, g), j);
    const auto xr = star_grid(ctx, f, x_multiply(g, j)) + star_grid(ctx, symplectic_gradient(ctx, f, j), g);
    CHECK(rel(xl, xr) < 1e-8);
  }
  const GridSpec s1{1, 12.0, 256};
  const auto g1 = make_gaussian(s1, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  const auto xg = x_multiply(g1, 0);
  for (std::int64_t m = 0; m < s1.size(); ++m) {
    const double x = s1.point(m)(0);
    CHECK(std::abs(xg.values[m] - x * std::exp(-0.5 * x * x)) < 1e-12);
  }
  CHECK(symplectic_gradient(StarContext(PoissonVectorSpace::trivial(2), s), g, 0).max_abs() == 0.0);
}

TEST_CASE("combined x^a d_b rule") {
  const GridSpec s{2, 10.0, 64};
  const StarContext ctx(PoissonVectorSpace::plane(0.7), s);
  const auto f = pointwise_product(gaussian(s, Eigen::Vector2d(0.3, -0.1), 0.9),
                                   sample_planewave(PlaneWaveSum::phase(s.dual_step() * Eigen::Vector2d(1, 2)), s));
  const auto g = gaussian(s, Eigen::Vector2d(-0.2, 0.4), 1.1);
  const auto fg = star_grid(ctx, f, g);
  for (const auto& a : multi_indices(2, 1))
    for (const auto& b : multi_indices(2, 1)) {
      const auto lhs = x_alpha_d_beta(fg, a, b);
      CHECK(rel(lhs, combined_expansion(ctx, f, g, a, b)) < 1e-8);
    }
  // a = b = 0 is the product itself; a = e_1, b = 0 is the x-multiplication rule
  const std::vector<int> z{0, 0}, e1{1, 0};
  CHECK(max_abs_diff(combined_expansion(ctx, f, g, z, z), fg) == 0.0);
  CHECK(rel(combined_expansion(ctx, f, g, e1, z),
            star_grid(ctx, f, x_multiply(g, 0)) + star_grid(ctx, symplectic_gradient(ctx, f, 0), g)) < 1e-13);
  // second order needs the binomial weights
  const std::vector<int> a2{2, 0}, b2{0, 1};
  CHECK(rel(x_alpha_d_beta(fg, a2, b2), combined_expansion(ctx, f, g, a2, b2)) < 1e-7);
}

TEST_CASE("approximate identity profile") {
  const GridSpec s = GridSpec::commensurate(2, 128, 1.0);
  CHECK(smoothstep7(0.0) == 0.0);
  CHECK(smoothstep7(1.0) == 1.0);
  CHECK(smoothstep7(0.5) == doctest::Approx(0.5));
  GridFunction prev;
  for (int k = 1; k <= 5; ++k) {
    const auto chi = approx_identity(s, k);
    CHECK(chi.values[s.size() / 2 + s.N / 2] == cplx(1.0, 0.0));  // x = 0
    for (const auto& v : chi.values) {
      CHECK(v.real() >= 0.0);
      CHECK(v.real() <= 1.0);
    }
    if (k > 1)
      for (std::int64_t m = 0; m < s.size(); ++m) CHECK(chi.values[m].real() >= prev.values[m].real());
    prev = chi;
  }
  CHECK_THROWS_AS(approx_identity(s, 8), ArgumentError);
}
