#include <doctest.h>

#include <random>

#include "moyal/errors.hpp"
#include "moyal/poisson.hpp"

using namespace moyal;

namespace {

Eigen::MatrixXd random_antisymmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a - a.transpose();
}

Eigen::VectorXd random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

Eigen::MatrixXd dfr_sigma0() {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(4, 4);
  s.topRightCorner(2, 2) = Eigen::MatrixXd::Identity(2, 2);
  s.bottomLeftCorner(2, 2) = -Eigen::MatrixXd::Identity(2, 2);
  return s;
}

}  // namespace

TEST_CASE("sharp follows the coordinate formula") {
  const auto p = PoissonVectorSpace::plane(1.0);
  CHECK(musical_sharp(p, Eigen::Vector2d(1, 0)).isApprox(Eigen::Vector2d(0, 1)));
  CHECK(musical_sharp(PoissonVectorSpace::trivial(3), Eigen::Vector3d(1, 2, 3)).norm() == 0.0);

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  s(0, 1) = 1;
  s(1, 0) = -1;
  CHECK(musical_sharp(PoissonVectorSpace(s), Eigen::Vector3d(0, 0, 1)).norm() == 0.0);
  CHECK_THROWS_AS(musical_sharp(p, Eigen::Vector3d(1, 0, 0)), ArgumentError);
}

TEST_CASE("sharp pairs to sigma") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const PoissonVectorSpace p(random_antisymmetric(5, rng));
    const auto xi = random_vec(5, rng), eta = random_vec(5, rng);
    CHECK(eta.dot(musical_sharp(p, xi)) == doctest::Approx(p.pairing(xi, eta)).epsilon(1e-12));
  }
}

TEST_CASE("non-antisymmetric input is rejected") {
  Eigen::MatrixXd s(2, 2);
  s << 0, 1, -1 + 1e-9, 0;
  CHECK_THROWS_AS(PoissonVectorSpace{s}, ArgumentError);
  s(1, 0) = -1 + 1e-14;
  CHECK_NOTHROW(PoissonVectorSpace{s});
}

TEST_CASE("json round trip") {
  const auto j = nlohmann::json::parse(R"({"n": 2, "sigma": [[0, 0.5], [-0.5, 0]]})");
  const auto p = PoissonVectorSpace::from_json(j);
  CHECK(p.sigma()(0, 1) == 0.5);
  CHECK(PoissonVectorSpace::from_json(p.to_json()).sigma() == p.sigma());
  CHECK_THROWS_AS(PoissonVectorSpace::from_json(nlohmann::json::parse(R"({"n": 2, "sigma": [[0, 1], [1, 0]]})")),
                  ArgumentError);
  CHECK_THROWS_AS(PoissonVectorSpace::from_json(nlohmann::json::parse(R"({"n": 3, "sigma": [[0, 1], [-1, 0]]})")),
                  ArgumentError);
}

TEST_CASE("rank decomposition examples") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  s(0, 1) = 1;
  s(1, 0) = -1;
  const auto d = rank_decomposition(PoissonVectorSpace(s));
  CHECK(d.rank == 2);
  CHECK(std::abs(d.W_basis.col(0)(2)) < 1e-14);
  CHECK(std::abs(d.W_basis.col(1)(2)) < 1e-14);
  CHECK(std::abs(std::abs(d.ker_basis(2, 0)) - 1.0) < 1e-14);

  const auto z = rank_decomposition(PoissonVectorSpace::trivial(3));
  CHECK(z.rank == 0);
  CHECK(z.V0_basis.cols() == 3);
  CHECK(z.omega.size() == 0);

  const auto f = rank_decomposition(PoissonVectorSpace(dfr_sigma0()));
  CHECK(f.rank == 4);
  CHECK(f.V0_basis.cols() == 0);
}

TEST_CASE("rank decomposition invariants on random degenerate sigma") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    const int r = 1 + static_cast<int>(rng() % (n / 2));
    // sigma = A J A^T with A n x 2r has rank 2r generically
    Eigen::MatrixXd a(n, 2 * r);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2 * r; ++j) a(i, j) = std::normal_distribution<double>()(rng);
    const PoissonVectorSpace p(a * standard_symplectic(r) * a.transpose());
    const auto d = rank_decomposition(p);
    REQUIRE(d.rank == 2 * r);
    Eigen::MatrixXd full(n, n);
    full << d.W_basis, d.V0_basis;
    CHECK(std::abs(full.determinant()) > 1e-8);
    for (int c = 0; c < d.ker_basis.cols(); ++c) CHECK(musical_sharp(p, d.ker_basis.col(c)).norm() < 1e-10);
    for (int k = 0; k < 100; ++k) {
      const auto xi = random_vec(n, rng), eta = random_vec(n, rng);
      // omega in W_basis coordinates: coordinates of sharp(xi) are W^T sharp(xi)
      const Eigen::VectorXd a1 = d.W_basis.transpose() * musical_sharp(p, xi);
      const Eigen::VectorXd a2 = d.W_basis.transpose() * musical_sharp(p, eta);
      CHECK(std::abs(a1.dot(d.omega * a2) - p.pairing(xi, eta)) < 1e-10 * std::max(1.0, std::abs(p.pairing(xi, eta))));
      // image of sharp lies in span W
      const Eigen::VectorXd v = musical_sharp(p, xi);
      CHECK((v - d.W_basis * (d.W_basis.transpose() * v)).norm() < 1e-10 * std::max(1.0, v.norm()));
    }
  }
}

TEST_CASE("darboux basis") {
  CHECK(darboux_basis(standard_symplectic(2)).isApprox(Eigen::MatrixXd::Identity(4, 4)));
  const Eigen::MatrixXd b = darboux_basis(4.0 * standard_symplectic(2));
  CHECK((b - 0.5 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd w = random_antisymmetric(4, rng);
    const Eigen::MatrixXd bb = darboux_basis(w);
    CHECK((bb.transpose() * w * bb - standard_symplectic(2)).cwiseAbs().maxCoeff() < 1e-10);
  }
  Eigen::MatrixXd sing = Eigen::MatrixXd::Zero(4, 4);
  sing(0, 1) = 1;
  sing(1, 0) = -1;
  CHECK_THROWS_AS(darboux_basis(sing), RankError);
}

TEST_CASE("heisenberg algebra and group") {
  const auto p = PoissonVectorSpace::plane(1.0);
  const HeisenbergElement a{Eigen::Vector2d(1, 0), 0}, b{Eigen::Vector2d(0, 1), 0};
  const auto c = heisenberg_commutator(p, a, b);
  CHECK(c.xi.norm() == 0.0);
  CHECK(c.lambda == 1.0);
  CHECK(heisenberg_commutator(p, a, a).lambda == 0.0);
  CHECK(heisenberg_commutator(PoissonVectorSpace::trivial(2), a, b).lambda == 0.0);

  const auto ab = heisenberg_product(p, a, b);
  CHECK(ab.xi.isApprox(Eigen::Vector2d(1, 1)));
  CHECK(ab.lambda == -0.5);
  const HeisenbergElement e{Eigen::Vector2d::Zero(), 0};
  const HeisenbergElement x{Eigen::Vector2d(0.3, -2), 1.7};
  CHECK(heisenberg_product(p, e, x).xi == x.xi);
  CHECK(heisenberg_product(p, e, x).lambda == x.lambda);
  const auto inv = heisenberg_product(p, x, heisenberg_inverse(p, x));
  CHECK(inv.xi.norm() == 0.0);
  CHECK(inv.lambda == 0.0);
}

TEST_CASE("associativity and Jacobi on random triples") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const PoissonVectorSpace p(random_antisymmetric(4, rng));
    HeisenbergElement h[3];
    for (auto& e : h) e = {random_vec(4, rng), std::normal_distribution<double>()(rng)};
    const auto l = heisenberg_product(p, heisenberg_product(p, h[0], h[1]), h[2]);
    const auto r = heisenberg_product(p, h[0], heisenberg_product(p, h[1], h[2]));
    CHECK((l.xi - r.xi).norm() < 1e-12);
    CHECK(std::abs(l.lambda - r.lambda) < 1e-12 * std::max(1.0, std::abs(l.lambda)));
    // every double commutator is central zero
    const auto c = heisenberg_commutator(p, h[0], heisenberg_commutator(p, h[1], h[2]));
    CHECK(c.lambda == 0.0);
    CHECK(c.xi.norm() == 0.0);
  }
}
