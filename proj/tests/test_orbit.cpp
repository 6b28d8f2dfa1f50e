#include <doctest.h>

#include <cmath>
#include <random>

#include "moyal/errors.hpp"
#include "moyal/orbit.hpp"
#include "moyal/star.hpp"

using namespace moyal;

namespace {

double rel_max(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// J_13 in the basis order of lorentz_algebra_basis(4): K1 K2 K3 J12 J13 J23
Eigen::MatrixXd rot13(double t) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(4, 4);
  r(1, 1) = r(3, 3) = std::cos(t);
  r(1, 3) = -std::sin(t);
  r(3, 1) = std::sin(t);
  return r;
}

Eigen::MatrixXd boost2(double y) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(4, 4);
  b(0, 0) = b(2, 2) = std::cosh(y);
  b(0, 2) = b(2, 0) = std::sinh(y);
  return b;
}

}  // namespace

TEST_CASE("Lorentz elements and the exponential") {
  CHECK(lorentz_defect(minkowski(4)) == 0.0);
  CHECK_THROWS_AS(LorentzElement(2.0 * Eigen::MatrixXd::Identity(4, 4)), ArgumentError);
  const auto basis = lorentz_algebra_basis(4);
  REQUIRE(basis.size() == 6);
  const Eigen::MatrixXd eta = minkowski(4);
  for (const auto& b : basis) CHECK((b.transpose() * eta + eta * b).cwiseAbs().maxCoeff() == 0.0);
  // closed forms: exp(t J13) is a rotation, exp(y K2) a boost
  CHECK(rel_max(expm(0.7 * basis[4]), rot13(0.7)) < 1e-14);
  CHECK(rel_max(expm(2.5 * basis[1]), boost2(2.5)) < 1e-13);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto g = random_lorentz(rng, 4);
    CHECK(lorentz_defect(g.matrix()) < 1e-10 * std::pow(g.matrix().cwiseAbs().maxCoeff(), 2));
    CHECK(rel_max(g.matrix() * g.inverse().matrix(), Eigen::MatrixXd::Identity(4, 4)) < 1e-9);
  }
}

TEST_CASE("orbit points") {
  const Eigen::MatrixXd s0 = dfr_sigma0();
  CHECK(orbit_point(LorentzElement::identity(4), s0) == s0);
  // E and B of s0 both lie along x2, so rotations about x2 fix it
  CHECK(rel_max(orbit_point(LorentzElement(rot13(1.1)), s0), s0) < 1e-15);
  CHECK(rel_max(orbit_point(LorentzElement(boost2(0.8)), s0), s0) < 1e-14);
  const Eigen::MatrixXd st = stabilizer_algebra(s0);
  for (int c = 0; c < st.cols(); ++c) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 6; ++i) a += st(i, c) * lorentz_algebra_basis(4)[i];
    CHECK(rel_max(orbit_point(LorentzElement(expm(0.9 * a)), s0), s0) < 1e-13);
  }
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const auto g = random_lorentz(rng, 4);
    const Eigen::MatrixXd p = orbit_point(g, s0);
    CHECK((p + p.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(p).singularValues();
    CHECK(sv(3) > 1e-6 * sv(0));
    CHECK(numeric_rank(p) == 4);
  }
  CHECK_THROWS_AS(orbit_point(LorentzElement::identity(3), s0), ArgumentError);
}

TEST_CASE("stabilizer and orbit dimensions") {
  const Eigen::MatrixXd s0 = dfr_sigma0();
  CHECK(stabilizer_algebra_dim(s0) == 2);
  CHECK(stabilizer_algebra_dim(Eigen::MatrixXd::Zero(4, 4)) == 6);
  CHECK(orbit_local_dim(s0) == 4);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 10; ++i) {
    const Eigen::MatrixXd p = orbit_point(random_lorentz(rng, 4, 0.5), s0);
    CHECK(stabilizer_algebra_dim(p) == 2);
    CHECK(stabilizer_algebra_dim(p) + orbit_local_dim(p) == 6);
  }
  // a degenerate form: E along x1, B = 0
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, 4);
  e(0, 1) = 1;
  e(1, 0) = -1;
  CHECK(stabilizer_algebra_dim(e) + orbit_local_dim(e) == 6);
}

TEST_CASE("orbit sampling, equivariance, invariants") {
  const Eigen::MatrixXd s0 = dfr_sigma0();
  const auto a = sample_orbit(s0, 50, 42);
  const auto b = sample_orbit(s0, 50, 42);
  for (int i = 0; i < 50; ++i) CHECK(a.points[i] == b.points[i]);
  CHECK(sample_orbit(s0, 20, 42).points[7] == a.points[7]);  // per-point streams

  const double q0 = quadratic_invariant(s0), p0 = pfaffian_magnitude(s0);
  CHECK(q0 == 0.0);
  CHECK(p0 == 1.0);
  for (int i = 0; i + 1 < 50; ++i) {
    const auto& g1 = a.elements[i];
    const auto& g2 = a.elements[i + 1];
    const Eigen::MatrixXd lhs = orbit_point(g1 * g2, s0);
    const Eigen::MatrixXd rhs = orbit_point(g1, orbit_point(g2, s0));
    CHECK(rel_max(lhs, rhs) < 1e-10);
    const double sc = std::pow(a.points[i].cwiseAbs().maxCoeff(), 2);
    CHECK(std::abs(quadratic_invariant(a.points[i]) - q0) < 1e-9 * std::max(1.0, sc));
    CHECK(std::abs(pfaffian_magnitude(a.points[i]) - p0) < 1e-9 * std::max(1.0, sc));
  }
}

TEST_CASE("orbit bundle") {
  const Eigen::MatrixXd s0 = dfr_sigma0();
  const auto one = orbit_bundle(sample_orbit(s0, 1, 0, 1.0, true));
  CHECK(one.size() == 1);
  CHECK(one.fiber(0).sigma() == s0);

  auto B = std::make_shared<const PoissonBundle>(orbit_bundle(s0, 12, 3));
  CHECK_FALSE(B->base().finite);
  for (int i = 0; i < B->size(); ++i) CHECK(B->fiber(i).rank() == 4);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  auto pw = [&](int) {
    PlaneWaveSum f(4);
    for (int t = 0; t < 3; ++t) f.add({g(rng), g(rng)}, Eigen::Vector4d(g(rng), g(rng), g(rng), g(rng)));
    return FiberValue(f);
  };
  const auto phi = SectionOverBase::from_function(B, pw), psi = SectionOverBase::from_function(B, pw);
  const auto prod = fiber_star(phi, psi);
  for (int i = 0; i < B->size(); ++i) {
    const auto direct = star_exact(StarContext(PoissonVectorSpace(B->fiber(i).sigma())),
                                   std::get<PlaneWaveSum>(phi.values[i]), std::get<PlaneWaveSum>(psi.values[i]));
    CHECK(max_coeff_diff(direct, std::get<PlaneWaveSum>(prod.values[i])) < 1e-13);
  }
}

TEST_CASE("trivialization of the associated bundle") {
  const Eigen::MatrixXd s0 = dfr_sigma0();
  std::mt19937_64 rng(17);
  const Eigen::Vector4d u0(0.3, -1.0, 2.0, 0.5);
  const auto g = random_lorentz(rng, 4);
  CHECK(trivialization_consistency(g, LorentzElement::identity(4), u0, s0));

  const Eigen::MatrixXd st = stabilizer_algebra(s0);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 10; ++trial) {
    const auto gg = random_lorentz(rng, 4);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    for (int c = 0; c < st.cols(); ++c) {
      const double w = n01(rng);
      for (int i = 0; i < 6; ++i) a += w * st(i, c) * lorentz_algebra_basis(4)[i];
    }
    const LorentzElement h(expm(a));
    CHECK(trivialization_consistency(gg, h, u0, s0));
    // with g^{-1} u0 in place of g u0 the map is not constant on classes
    const Eigen::Vector4d v1 = gg.inverse().matrix() * u0;
    const Eigen::Vector4d v2 = (gg * h).inverse().matrix() * (h.inverse().matrix() * u0);
    CHECK((v1 - v2).norm() > 1e-6);
  }
  CHECK_THROWS_AS(trivialization_consistency(g, LorentzElement(boost2(0.3) * rot13(0.2) * expm(0.4 * lorentz_algebra_basis(4)[0])), u0, s0),
                  ArgumentError);
}

TEST_CASE("tangent space data") {
  const Eigen::MatrixXd s0 = dfr_sigma0();
  const Eigen::MatrixXd eta = minkowski(4);
  const auto flat = tangent_dfr_data(eta, s0);
  CHECK(flat.frame == Eigen::MatrixXd::Identity(4, 4));
  CHECK(flat.sigma == s0);

  const double c = 1.7;
  const auto scaled = tangent_dfr_data(c * c * eta, s0);
  CHECK(rel_max(scaled.frame, Eigen::MatrixXd::Identity(4, 4) / c) < 1e-15);
  CHECK(rel_max(scaled.sigma, s0 / (c * c)) < 1e-15);
  CHECK(numeric_rank(scaled.sigma) == 4);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd p(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j <= i; ++j) p(i, j) = p(j, i) = u(rng);
    const Eigen::MatrixXd m = eta + p;
    const auto t = tangent_dfr_data(m, s0);
    CHECK((t.sigma + t.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(numeric_rank(t.sigma) == 4);
    CHECK((t.frame.transpose() * m * t.frame - eta).cwiseAbs().maxCoeff() < 1e-12);
  }
  // a Lorentzian metric whose e_0 is spacelike still gets a frame
  Eigen::MatrixXd swapped = eta;
  swapped(0, 0) = -1;
  swapped(3, 3) = 1;
  const auto sw = tangent_dfr_data(swapped, s0);
  CHECK((sw.frame.transpose() * swapped * sw.frame - eta).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(tangent_dfr_data(Eigen::MatrixXd::Identity(4, 4), s0), ArgumentError);
  CHECK_THROWS_AS(tangent_dfr_data(-eta, s0), ArgumentError);
}
