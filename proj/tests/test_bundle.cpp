#include <doctest.h>

#include <cmath>
#include <random>

#include "moyal/bundle.hpp"
#include "moyal/errors.hpp"
#include "moyal/star.hpp"

using namespace moyal;

namespace {

Eigen::MatrixXd plane_sigma(double t) {
  Eigen::MatrixXd s(2, 2);
  s << 0, t, -t, 0;
  return s;
}

std::shared_ptr<const PoissonBundle> two_point(double t0, double t1) {
  return std::make_shared<const PoissonBundle>(BaseSpace::named({"a", "b"}),
                                               std::vector<Eigen::MatrixXd>{plane_sigma(t0), plane_sigma(t1)});
}

GridFunction gauss(const GridSpec& s, double w = 1.0) {
  return make_gaussian(s, Eigen::VectorXd::Zero(s.n), Eigen::VectorXd::Constant(s.n, w));
}

PlaneWaveSum random_pw(std::mt19937_64& rng, int n, int terms) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> k(-3, 3);
  PlaneWaveSum f(n);
  for (int t = 0; t < terms; ++t) {
    Eigen::VectorXd xi(n);
    for (auto& v : xi) v = 0.5 * k(rng);
    f.add({g(rng), g(rng)}, xi);
  }
  return f;
}

FiniteCStarModuleAlgebra random_algebra(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> npts(1, 5), nblk(0, 2), dim(1, 4);
  std::vector<std::string> ids;
  const int X = npts(rng);
  for (int i = 0; i < X; ++i) ids.push_back("p" + std::to_string(i));
  std::vector<std::vector<int>> fibers(X);
  for (auto& f : fibers)
    for (int b = nblk(rng); b > 0; --b) f.push_back(dim(rng));
  return FiniteCStarModuleAlgebra::pointwise(BaseSpace::named(ids), fibers);
}

}  // namespace

TEST_CASE("base space and bundle description") {
  CHECK_THROWS_AS(BaseSpace::named({"a", "a"}), ArgumentError);
  const auto B = two_point(0.0, 1.5);
  CHECK(B->fiber("b").sigma()(0, 1) == 1.5);
  CHECK_THROWS_AS(B->fiber("c"), ArgumentError);
  const auto back = PoissonBundle::from_json(B->to_json());
  CHECK(back.size() == 2);
  CHECK(back.fiber(1).sigma() == B->fiber(1).sigma());
  CHECK(back.fiber(0).rank() == 0);
  CHECK(back.fiber(1).rank() == 2);
  nlohmann::json bad = B->to_json();
  bad["sigma_at"]["a"] = {{0, 1}, {1, 0}};
  CHECK_THROWS(PoissonBundle::from_json(bad));
}

TEST_CASE("fiber star is pointwise") {
  std::mt19937_64 rng(11);
  // constant sigma: same as one context everywhere
  auto B = std::make_shared<const PoissonBundle>(
      PoissonBundle::constant(BaseSpace::named({"a", "b", "c"}), PoissonVectorSpace::plane(0.7)));
  std::vector<FiberValue> u, v;
  for (int i = 0; i < 3; ++i) {
    u.emplace_back(random_pw(rng, 2, 4));
    v.emplace_back(random_pw(rng, 2, 4));
  }
  const SectionOverBase phi(B, u), psi(B, v);
  const auto prod = fiber_star(phi, psi);
  const StarContext ctx(PoissonVectorSpace::plane(0.7));
  for (int i = 0; i < 3; ++i)
    CHECK(identical(std::get<PlaneWaveSum>(prod.values[i]),
                    star_exact(ctx, std::get<PlaneWaveSum>(u[i]), std::get<PlaneWaveSum>(v[i]))));

  // evaluation is a *-homomorphism into the fiber at every point, sigma varying
  std::vector<Eigen::MatrixXd> sig;
  for (int i = 0; i < 4; ++i) sig.push_back(plane_sigma(0.5 * i));
  auto V = std::make_shared<const PoissonBundle>(BaseSpace::named({"0", "1", "2", "3"}), sig);
  const auto f = SectionOverBase::from_function(V, [&](int) { return FiberValue(random_pw(rng, 2, 3)); });
  const auto g = SectionOverBase::from_function(V, [&](int) { return FiberValue(random_pw(rng, 2, 3)); });
  const auto fg = fiber_star(f, g);
  for (int i = 0; i < 4; ++i) {
    const auto id = std::to_string(i);
    const auto direct = star_exact(StarContext(V->fiber(i)), std::get<PlaneWaveSum>(evaluation(f, id)),
                                   std::get<PlaneWaveSum>(evaluation(g, id)));
    CHECK(max_coeff_diff(std::get<PlaneWaveSum>(evaluation(fg, id)), direct) < 1e-14);
  }
  CHECK_THROWS_AS(evaluation(fg, "9"), ArgumentError);
}

TEST_CASE("fiber star over a base with ranks 0 and 2") {
  const GridSpec s{2, 12.0, 96};
  const double theta = 1.0;
  const auto B = two_point(0.0, theta);
  const SectionOverBase phi(B, {gauss(s), gauss(s)});
  const auto sq = fiber_star(phi, phi);
  const auto& a = std::get<GridFunction>(sq.values[0]);
  const auto& b = std::get<GridFunction>(sq.values[1]);
  const double c = 1.0 + theta * theta / 4.0;
  double ea = 0.0, eb = 0.0;
  for (std::int64_t m = 0; m < s.size(); ++m) {
    const double r2 = s.point(m).squaredNorm();
    ea = std::max(ea, std::abs(a.values[m] - std::exp(-r2)));           // pointwise product
    eb = std::max(eb, std::abs(b.values[m] - std::exp(-r2 / c) / c));   // Moyal square
  }
  CHECK(ea < 1e-12);
  CHECK(eb < 1e-10);
}

TEST_CASE("sup seminorms over base subsets") {
  const GridSpec s{1, 20.0, 256};
  std::vector<BasePoint> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({"w" + std::to_string(i), Eigen::VectorXd::Constant(1, i), 1.0, true});
  auto B = std::make_shared<const PoissonBundle>(PoissonBundle::constant(BaseSpace(pts), PoissonVectorSpace::trivial(1)));
  const std::vector<double> widths{0.6, 0.8, 1.0, 1.3, 1.7};
  const auto phi = SectionOverBase::from_function(B, [&](int i) { return FiberValue(gauss(s, widths[i])); });
  std::vector<std::string> all;
  for (const auto& p : pts) all.push_back(p.id);

  // s_{1,0}(e^{-x^2/2w^2}) = 1 + w e^{-1/2}: largest at the widest point
  const double sup = section_sup_seminorm(phi, 1, 0, all);
  CHECK(std::abs(sup - (1.0 + 1.7 * std::exp(-0.5))) < 2e-3);
  CHECK(sup == seminorm(std::get<GridFunction>(phi.values[4]), 1, 0));
  CHECK(section_sup_seminorm(phi, 1, 0, {"w2"}) == seminorm(std::get<GridFunction>(phi.values[2]), 1, 0));

  const auto zero = module_action(std::vector<double>(5, 0.0), phi);
  CHECK(section_sup_seminorm(zero, 2, 2, all) == 0.0);
  CHECK_THROWS_AS(section_sup_seminorm(phi, 0, 0, {}), ArgumentError);

  const auto one = module_action(std::vector<double>(5, 1.0), phi);
  for (int i = 0; i < 5; ++i)
    CHECK(max_abs_diff(std::get<GridFunction>(one.values[i]), std::get<GridFunction>(phi.values[i])) == 0.0);

  // ||f phi||_{s,K} <= max_K |f| ||phi||_{s,K}
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> f(5);
    for (auto& v : f) v = u(rng);
    const std::vector<std::string> K{"w1", "w3", "w4"};
    double fk = 0.0;
    for (const auto& id : K) fk = std::max(fk, std::abs(f[B->base().index_of(id)]));
    for (int p = 0; p <= 2; ++p)
      CHECK(section_sup_seminorm(module_action(f, phi), p, 1, K) <= fk * section_sup_seminorm(phi, p, 1, K) * (1 + 1e-14));
  }
}

TEST_CASE("fiberwise C* sup norm") {
  const GridSpec s{2, 8.0, 32};
  const auto B = two_point(0.0, 1.0);
  // plane waves are unitaries in every fiber
  const Eigen::Vector2d k1 = s.dual_step() * Eigen::Vector2d(1, 0), k2 = s.dual_step() * Eigen::Vector2d(2, -1);
  const SectionOverBase waves(B, {PlaneWaveSum::phase(k1), PlaneWaveSum::phase(k2)});
  CHECK(std::abs(cstar_fiber_sup_norm(waves, s) - 1.0) < 1e-9);
  const SectionOverBase zero(B, {0.0 * gauss(s), 0.0 * gauss(s)});
  CHECK(cstar_fiber_sup_norm(zero, s) == 0.0);

  // e^{-|x|^2/2} is cosh(t) e^{-t H} in Weyl symbols, tanh t = theta/2, so its norm is 1/(1 + theta/2);
  // in the commutative fiber the norm is the sup. The grid splits the infinitely degenerate top
  // singular value into a cluster ~1e-5 wide, so the iteration is stopped at 1e-6.
  NormOptions o;
  o.rel_tol = 1e-6;
  const SectionOverBase ga(B, {0.5 * gauss(s), gauss(s)});
  CHECK(std::abs(cstar_fiber_sup_norm(ga, s, o) - 2.0 / 3.0) < 2e-4);
  const SectionOverBase gb(B, {0.9 * gauss(s), gauss(s)});
  CHECK(std::abs(cstar_fiber_sup_norm(gb, s, o) - 0.9) < 1e-5);
}

TEST_CASE("sectional representation of finite algebras") {
  const auto X2 = BaseSpace::named({"a", "b"});
  const auto A = FiniteCStarModuleAlgebra::pointwise(X2, {{2}, {2}});
  CHECK(A.dim() == 8);
  const auto qa = sr_fiber(A, "a");
  CHECK(qa.dim == 4);
  CHECK(qa.ideal_dim == 4);
  CHECK(qa.fiber_dims == std::vector<int>{2});
  CHECK_THROWS_AS(sr_fiber(A, "z"), ArgumentError);

  const auto single = FiniteCStarModuleAlgebra::pointwise(BaseSpace::named({"x"}), {{3, 1}});
  const auto qx = sr_fiber(single, 0);
  CHECK(qx.dim == single.dim());
  CHECK(qx.ideal_dim == 0);
  CHECK((qx.to_fiber * qx.quotient - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sectional_roundtrip(single).ok());

  const auto scalars = FiniteCStarModuleAlgebra::pointwise(BaseSpace::named({"a", "b", "c"}), {{1}, {1}, {1}});
  for (int x = 0; x < 3; ++x) CHECK(sr_fiber(scalars, x).dim == 1);

  const auto r = sectional_roundtrip(A);
  CHECK(r.ok());
  CHECK(r.dim_sections == r.dim_algebra);

  // both blocks respond only to f(a): the block at b is never reached by Phi
  const FiniteCStarModuleAlgebra deg(X2, {2, 2}, {0, std::nullopt});
  CHECK_FALSE(deg.nondegenerate());
  const auto rd = sectional_roundtrip(deg);
  CHECK_FALSE(rd.ok());
  CHECK_FALSE(rd.nondegenerate);
  CHECK(rd.dim_sections == 12);  // the stray block shows up in both quotients

  // empty fiber over a point is allowed
  const auto gap = FiniteCStarModuleAlgebra::pointwise(BaseSpace::named({"a", "b", "c"}), {{2}, {}, {1, 3}});
  CHECK(sr_fiber(gap, 1).dim == 0);
  CHECK(sectional_roundtrip(gap).ok());
}

TEST_CASE("random finite algebras round trip") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 15; ++trial) {
    const auto A = random_algebra(rng);
    if (A.dim() == 0) continue;
    const auto r = sectional_roundtrip(A, trial);
    CHECK(r.ok());
    CHECK(r.bijective);
    CHECK(r.multiplication_defect < 1e-12);
    CHECK(r.isometry_defect < 1e-12);
    int sum = 0;
    for (int x = 0; x < A.base.size(); ++x) sum += sr_fiber(A, x).dim;
    CHECK(sum == A.dim());
  }
}

TEST_CASE("base change functors") {
  const auto X = BaseSpace::named({"a", "b"});
  const auto A = FiniteCStarModuleAlgebra::pointwise(X, {{2}, {1, 2}});
  // identity
  for (const auto& rep : fiber_formula_check({0, 1}, X, A)) CHECK(rep.ok);
  const auto same = change_base_ring({0, 1}, X, A);
  CHECK(same.block_point == A.block_point);

  // collapse onto one point, plus a target point nothing maps to
  const auto Y = BaseSpace::named({"y", "lonely"});
  const auto reps = fiber_formula_check({0, 0}, Y, A);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].ok);
  CHECK(reps[0].dim_pushed == sr_fiber(A, 0).dim + sr_fiber(A, 1).dim);
  CHECK(reps[0].dim_pushed == 9);
  CHECK(reps[1].ok);
  CHECK(reps[1].dim_pushed == 0);
  CHECK(sectional_roundtrip(change_base_ring({0, 0}, Y, A)).ok());

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto B = random_algebra(rng);
    std::uniform_int_distribution<int> tgt(0, 2);
    std::vector<int> f(B.base.size());
    for (auto& v : f) v = tgt(rng);
    for (const auto& rep : fiber_formula_check(f, BaseSpace::named({"u", "v", "w"}), B)) CHECK(rep.ok);
  }
}

TEST_CASE("pullback shares fibers and composes") {
  const auto Z = std::make_shared<const PoissonBundle>(BaseSpace::named({"z0", "z1"}),
                                                       std::vector<Eigen::MatrixXd>{plane_sigma(1), plane_sigma(2)});
  const auto Y = BaseSpace::named({"y0", "y1", "y2"});
  const auto X = BaseSpace::named({"x0", "x1", "x2", "x3"});
  const std::vector<int> g{1, 0, 1};     // Y -> Z
  const std::vector<int> f{2, 2, 0, 1};  // X -> Y
  std::vector<int> gf;
  for (int y : f) gf.push_back(g[y]);
  const auto direct = pullback_bundle(gf, X, *Z);
  const auto stepwise = pullback_bundle(f, X, pullback_bundle(g, Y, *Z));
  for (int i = 0; i < 4; ++i) {
    CHECK(direct.fiber_ptr(i) == stepwise.fiber_ptr(i));
    CHECK(direct.fiber_ptr(i) == Z->fiber_ptr(gf[i]));
  }
  const auto id = pullback_bundle({0, 1}, Z->base(), *Z);
  CHECK(id.fiber_ptr(0) == Z->fiber_ptr(0));
  CHECK_THROWS_AS(pullback_bundle({0, 5}, Z->base(), *Z), ArgumentError);
}

TEST_CASE("semicontinuity sampling") {
  const GridSpec s{1, 16.0, 128};
  std::vector<BasePoint> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({"t" + std::to_string(i), Eigen::VectorXd::Constant(1, 0.1 * i), 1.0, true});
  BaseSpace base(pts, false);
  base.chain_neighbors();
  auto B = std::make_shared<const PoissonBundle>(PoissonBundle::constant(base, PoissonVectorSpace::trivial(1)));
  const auto smooth = SectionOverBase::from_function(B, [&](int i) { return FiberValue(gauss(s, 1.0 + 0.01 * i)); });
  CHECK(usc_sample_check(smooth, 1, 1, 0.05).violations == 0);

  // constant value with sigma varying: seminorms do not see sigma
  std::vector<Eigen::MatrixXd> sig;
  for (int i = 0; i < 8; ++i) sig.push_back(plane_sigma(0.3 * i));
  auto V = std::make_shared<const PoissonBundle>(base, sig);
  const GridSpec s2{2, 8.0, 32};
  const auto constant = SectionOverBase::from_function(V, [&](int) { return FiberValue(gauss(s2)); });
  CHECK(usc_sample_check(constant, 1, 1, 1e-12).violations == 0);

  auto jumped = smooth;
  std::get<GridFunction>(jumped.values[5]) *= 3.0;
  const auto r = usc_sample_check(jumped, 1, 1, 0.05);
  CHECK(r.violations == 1);
  CHECK(r.violation[5]);
}
