#include "moyal/poisson.hpp"

#include <cmath>
#include <string>

#include "moyal/errors.hpp"

namespace moyal {

namespace {

constexpr double kAntisymmetryTol = 1e-12;
constexpr double kRankRelTol = 1e-10;

void require_dim(const PoissonVectorSpace& pvs, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != pvs.dim()) {
    throw ArgumentError(std::string(what) + ": expected " + std::to_string(pvs.dim()) +
                        " components, got " + std::to_string(v.size()));
  }
}

int numerical_rank(const Eigen::VectorXd& singular_values) {
  if (singular_values.size() == 0 || singular_values(0) == 0.0) return 0;
  const double cut = kRankRelTol * singular_values(0);
  int r = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) > cut) ++r;
  return r;
}

}  // namespace

PoissonVectorSpace::PoissonVectorSpace(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
    throw ArgumentError("Poisson matrix must be square and nonempty");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  const double asym = (sigma + sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAntisymmetryTol * scale)
    throw ArgumentError("Poisson matrix is not antisymmetric (violation " + std::to_string(asym) + ")");
  sigma_ = 0.5 * (sigma - sigma.transpose());
}

PoissonVectorSpace PoissonVectorSpace::plane(double s) {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, s, -s, 0.0;
  return PoissonVectorSpace(m);
}

PoissonVectorSpace PoissonVectorSpace::trivial(int n) {
  return PoissonVectorSpace(Eigen::MatrixXd::Zero(n, n));
}

double PoissonVectorSpace::pairing(const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) const {
  require_dim(*this, xi, "pairing");
  require_dim(*this, eta, "pairing");
  return xi.dot(sigma_ * eta);
}

int PoissonVectorSpace::rank() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma_);
  return numerical_rank(svd.singularValues());
}

PoissonVectorSpace PoissonVectorSpace::from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const auto& rows = j.at("sigma");
  if (n <= 0 || static_cast<int>(rows.size()) != n)
    throw ArgumentError("sigma must have n rows");
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(rows[r].size()) != n) throw ArgumentError("sigma must be n x n");
    for (int c = 0; c < n; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return PoissonVectorSpace(m);
}

nlohmann::json PoissonVectorSpace::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < dim(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < dim(); ++c) row.push_back(sigma_(r, c));
    rows.push_back(row);
  }
  return {{"n", dim()}, {"sigma", rows}};
}

Eigen::VectorXd musical_sharp(const PoissonVectorSpace& pvs, const Eigen::VectorXd& xi) {
  require_dim(pvs, xi, "musical_sharp");
  return pvs.sigma().transpose() * xi;
}

RankDecomposition rank_decomposition(const PoissonVectorSpace& pvs) {
  const int n = pvs.dim();
  // sharp = sigma^T; its image is W and its kernel (on covectors) is ker sigma.
  const Eigen::MatrixXd sharp = pvs.sigma().transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sharp, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const int r = numerical_rank(svd.singularValues());

  RankDecomposition out;
  out.rank = r;
  out.W_basis = svd.matrixU().leftCols(r);
  out.V0_basis = svd.matrixU().rightCols(n - r);
  out.ker_basis = svd.matrixV().rightCols(n - r);
  if (r > 0) {
    // sharp restricted to W in W_basis coordinates; omega is its inverse.
    const Eigen::MatrixXd s = out.W_basis.transpose() * sharp * out.W_basis;
    Eigen::MatrixXd omega = s.inverse();
    out.omega = 0.5 * (omega - omega.transpose());
  } else {
    out.omega = Eigen::MatrixXd(0, 0);
  }
  return out;
}

Eigen::MatrixXd standard_symplectic(int r) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * r, 2 * r);
  j.topRightCorner(r, r) = Eigen::MatrixXd::Identity(r, r);
  j.bottomLeftCorner(r, r) = -Eigen::MatrixXd::Identity(r, r);
  return j;
}

Eigen::MatrixXd darboux_basis(const Eigen::MatrixXd& omega) {
  const Eigen::Index m = omega.rows();
  if (omega.cols() != m || m % 2 != 0) throw ArgumentError("darboux_basis: omega must be square of even size");
  if ((omega + omega.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, omega.cwiseAbs().maxCoeff()))
    throw ArgumentError("darboux_basis: omega must be antisymmetric");
  const int r = static_cast<int>(m / 2);
  const double scale = m == 0 ? 0.0 : omega.cwiseAbs().maxCoeff();

  std::vector<Eigen::VectorXd> pool;
  for (Eigen::Index i = 0; i < m; ++i) pool.push_back(Eigen::VectorXd::Unit(m, i));
  auto form = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(omega * b); };

  Eigen::MatrixXd basis(m, m);
  for (int step = 0; step < r; ++step) {
    std::size_t bi = 0, bj = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i)
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        const double w = std::abs(form(pool[i], pool[j]));
        if (w > best) { best = w; bi = i; bj = j; }
      }
    if (best <= 1e-12 * scale || best == 0.0) throw RankError("darboux_basis: omega is singular");
    const double w = form(pool[bi], pool[bj]);
    const double norm = 1.0 / std::sqrt(std::abs(w));
    const Eigen::VectorXd q = pool[bi] * norm;
    const Eigen::VectorXd p = pool[bj] * (w > 0 ? norm : -norm);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(bj));
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(bi));
    for (auto& v : pool) v = v - form(v, p) * q + form(v, q) * p;
    basis.col(step) = q;
    basis.col(r + step) = p;
  }
  return basis;
}

HeisenbergElement heisenberg_commutator(const PoissonVectorSpace& pvs, const HeisenbergElement& a,
                                        const HeisenbergElement& b) {
  return {Eigen::VectorXd::Zero(pvs.dim()), pvs.pairing(a.xi, b.xi)};
}

HeisenbergElement heisenberg_product(const PoissonVectorSpace& pvs, const HeisenbergElement& a,
                                     const HeisenbergElement& b) {
  return {a.xi + b.xi, a.lambda + b.lambda - 0.5 * pvs.pairing(a.xi, b.xi)};
}

HeisenbergElement heisenberg_inverse(const PoissonVectorSpace& pvs, const HeisenbergElement& a) {
  require_dim(pvs, a.xi, "heisenberg_inverse");
  return {-a.xi, -a.lambda};
}

}  // namespace moyal
