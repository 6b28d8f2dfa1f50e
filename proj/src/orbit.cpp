#include "moyal/orbit.hpp"

#include <cmath>
#include <string>

#include "moyal/errors.hpp"

namespace moyal {

Eigen::MatrixXd minkowski(int n) {
  Eigen::VectorXd d = -Eigen::VectorXd::Ones(n);
  d(0) = 1.0;
  return d.asDiagonal();
}

double lorentz_defect(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd eta = minkowski(static_cast<int>(m.rows()));
  return (m.transpose() * eta * m - eta).cwiseAbs().maxCoeff();
}

LorentzElement::LorentzElement(const Eigen::MatrixXd& m, double tol) : m_(m) {
  if (m.rows() != m.cols() || m.rows() < 2) throw ArgumentError("Lorentz element must be square, n >= 2");
  // entries of large boosts grow like cosh, so the check scales with them
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff() * m.cwiseAbs().maxCoeff());
  if (lorentz_defect(m) > tol * scale) throw ArgumentError("matrix does not preserve the Minkowski form");
}

LorentzElement LorentzElement::inverse() const {
  const Eigen::MatrixXd eta = minkowski(dim());
  return LorentzElement(eta * m_.transpose() * eta, 1e-9);
}

std::vector<Eigen::MatrixXd> lorentz_algebra_basis(int n) {
  std::vector<Eigen::MatrixXd> out;
  for (int i = 1; i < n; ++i) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    k(0, i) = k(i, 0) = 1.0;
    out.push_back(k);
  }
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
      r(i, j) = -1.0;
      r(j, i) = 1.0;
      out.push_back(r);
    }
  return out;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const Eigen::MatrixXd b = a / std::ldexp(1.0, squarings);
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n), sum = term;
  // ||b|| <= 1/2: 20 terms put the remainder below 1e-25
  for (int k = 1; k <= 20; ++k) {
    term = term * b / k;
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

LorentzElement random_lorentz(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  const auto basis = lorentz_algebra_basis(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& b : basis) a += g(rng) * b;
  return LorentzElement(expm(a));
}

Eigen::MatrixXd orbit_point(const LorentzElement& g, const Eigen::MatrixXd& sigma0) {
  if (sigma0.rows() != g.dim() || sigma0.cols() != g.dim()) throw ArgumentError("orbit_point: dimension mismatch");
  const Eigen::MatrixXd s = g.matrix() * sigma0 * g.matrix().transpose();
  return 0.5 * (s - s.transpose());
}

Eigen::MatrixXd dfr_sigma0() {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(4, 4);
  s.topRightCorner(2, 2) = Eigen::Matrix2d::Identity();
  s.bottomLeftCorner(2, 2) = -Eigen::Matrix2d::Identity();
  return s;
}

namespace {

Eigen::VectorXd vec(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }

// column i: derivative of the orbit map at sigma along basis element i
Eigen::MatrixXd orbit_linearization(const Eigen::MatrixXd& sigma) {
  const int n = static_cast<int>(sigma.rows());
  const auto basis = lorentz_algebra_basis(n);
  Eigen::MatrixXd m(n * n, basis.size());
  for (size_t i = 0; i < basis.size(); ++i) m.col(i) = vec(basis[i] * sigma + sigma * basis[i].transpose());
  return m;
}

}  // namespace

int numeric_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  const double cut = tol * std::max(1.0, sv(0));
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > cut;
  return r;
}

Eigen::MatrixXd stabilizer_algebra(const Eigen::MatrixXd& sigma0, double tol) {
  if (sigma0.rows() != sigma0.cols()) throw ArgumentError("sigma0 must be square");
  const Eigen::MatrixXd m = orbit_linearization(sigma0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cut = tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
  std::vector<int> null;
  for (Eigen::Index i = 0; i < m.cols(); ++i)
    if (i >= sv.size() || sv(i) <= cut) null.push_back(static_cast<int>(i));
  Eigen::MatrixXd out(m.cols(), null.size());
  for (size_t k = 0; k < null.size(); ++k) out.col(k) = svd.matrixV().col(null[k]);
  return out;
}

int stabilizer_algebra_dim(const Eigen::MatrixXd& sigma0, double tol) {
  return static_cast<int>(stabilizer_algebra(sigma0, tol).cols());
}

int orbit_local_dim(const Eigen::MatrixXd& sigma, double h, double tol) {
  const int n = static_cast<int>(sigma.rows());
  const auto basis = lorentz_algebra_basis(n);
  Eigen::MatrixXd d(n * n, basis.size());
  for (size_t i = 0; i < basis.size(); ++i) {
    const Eigen::MatrixXd p = expm(h * basis[i]), q = expm(-h * basis[i]);
    d.col(i) = vec(p * sigma * p.transpose() - q * sigma * q.transpose()) / (2.0 * h);
  }
  return numeric_rank(d, tol);
}

OrbitSample sample_orbit(const Eigen::MatrixXd& sigma0, int k, std::uint64_t seed, double scale,
                         bool include_identity) {
  if (k < 1) throw ArgumentError("orbit sample needs k >= 1");
  const int n = static_cast<int>(sigma0.rows());
  if (sigma0.cols() != n || (sigma0 + sigma0.transpose()).cwiseAbs().maxCoeff() > 0.0)
    throw ArgumentError("sigma0 must be antisymmetric");
  OrbitSample s;
  s.sigma0 = sigma0;
  s.elements.reserve(k);
  for (int i = 0; i < k; ++i) {
    if (include_identity && i == 0) {
      s.elements.push_back(LorentzElement::identity(n));
      continue;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    s.elements.push_back(random_lorentz(rng, n, scale));
  }
  for (const auto& g : s.elements) s.points.push_back(orbit_point(g, sigma0));
  return s;
}

PoissonBundle orbit_bundle(const OrbitSample& s) {
  const int r0 = numeric_rank(s.sigma0);
  std::vector<BasePoint> pts;
  for (size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    if (numeric_rank(p) != r0) throw RankError("orbit point " + std::to_string(i) + " changed rank");
    Eigen::VectorXd coords(p.rows() * (p.rows() - 1) / 2);
    int c = 0;
    for (Eigen::Index a = 0; a < p.rows(); ++a)
      for (Eigen::Index b = a + 1; b < p.rows(); ++b) coords(c++) = p(a, b);
    pts.push_back({"s" + std::to_string(i), coords, 1.0, true});
  }
  return PoissonBundle(BaseSpace(std::move(pts), false), s.points);
}

PoissonBundle orbit_bundle(const Eigen::MatrixXd& sigma0, int k, std::uint64_t seed) {
  return orbit_bundle(sample_orbit(sigma0, k, seed));
}

double quadratic_invariant(const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd eta = minkowski(static_cast<int>(sigma.rows()));
  return 0.5 * sigma.cwiseProduct(eta * sigma * eta).sum();
}

double pfaffian_magnitude(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != 4 || sigma.cols() != 4) throw ArgumentError("pfaffian_magnitude: 4x4 only");
  const Eigen::MatrixXd eta = minkowski(4);
  const Eigen::MatrixXd a = eta * sigma * eta;
  return std::abs(a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2));
}

bool trivialization_consistency(const LorentzElement& g, const LorentzElement& h, const Eigen::VectorXd& u0,
                                const Eigen::MatrixXd& sigma0, double tol) {
  const auto scale = [](const Eigen::MatrixXd& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); };
  const double hs = scale(h.matrix()) * scale(h.matrix()) * scale(sigma0);
  if ((orbit_point(h, sigma0) - sigma0).cwiseAbs().maxCoeff() > tol * hs)
    throw ArgumentError("h does not stabilize sigma0");
  const LorentzElement gh = g * h;
  const Eigen::MatrixXd c1 = orbit_point(g, sigma0), c2 = orbit_point(gh, sigma0);
  const Eigen::VectorXd v1 = g.matrix() * u0;
  const Eigen::VectorXd v2 = gh.matrix() * (h.inverse().matrix() * u0);
  const double gs = scale(g.matrix()) * scale(g.matrix()) * hs;
  return (c1 - c2).cwiseAbs().maxCoeff() <= tol * gs &&
         (v1 - v2).cwiseAbs().maxCoeff() <= tol * gs * std::max(1.0, u0.cwiseAbs().maxCoeff());
}

TangentFiber tangent_dfr_data(const Eigen::MatrixXd& metric, const Eigen::MatrixXd& sigma0) {
  const int n = static_cast<int>(metric.rows());
  if (metric.cols() != n || sigma0.rows() != n || sigma0.cols() != n)
    throw ArgumentError("tangent_dfr_data: dimension mismatch");
  if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, metric.cwiseAbs().maxCoeff()))
    throw ArgumentError("metric must be symmetric");
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(metric).eigenvalues();
  const double cut = 1e-12 * ev.cwiseAbs().maxCoeff();
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    pos += ev(i) > cut;
    neg += ev(i) < -cut;
  }
  if (pos != 1 || neg != n - 1) throw ArgumentError("metric must have signature (1, n-1)");

  const Eigen::MatrixXd eta = minkowski(n);
  const auto ip = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return u.dot(metric * v); };
  // Gram-Schmidt on the coordinate basis; e_0 must be timelike and the rest come out spacelike
  // for metrics near eta. Otherwise start from the eigenvectors, timelike first.
  auto gram_schmidt = [&](const Eigen::MatrixXd& start, Eigen::MatrixXd& f) {
    f.resize(n, n);
    for (int a = 0; a < n; ++a) {
      Eigen::VectorXd v = start.col(a);
      for (int b = 0; b < a; ++b) v -= eta(b, b) * ip(v, f.col(b)) * f.col(b);
      const double q = ip(v, v);
      if (q * eta(a, a) <= 1e-12 * std::max(1.0, v.squaredNorm())) return false;
      f.col(a) = v / std::sqrt(std::abs(q));
    }
    return true;
  };
  TangentFiber out;
  if (!gram_schmidt(Eigen::MatrixXd::Identity(n, n), out.frame)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(metric);
    Eigen::MatrixXd start(n, n);
    start.col(0) = es.eigenvectors().col(n - 1);
    for (int a = 1; a < n; ++a) start.col(a) = es.eigenvectors().col(a - 1);
    if (!gram_schmidt(start, out.frame)) throw NumericError("tangent_dfr_data: frame construction failed", 0, 0);
  }
  const Eigen::MatrixXd check = out.frame.transpose() * metric * out.frame - eta;
  if (check.cwiseAbs().maxCoeff() > 1e-10) throw NumericError("tangent_dfr_data: frame is not orthonormal", 0, 0);
  const Eigen::MatrixXd s = out.frame * sigma0 * out.frame.transpose();
  out.sigma = 0.5 * (s - s.transpose());
  return out;
}

}  // namespace moyal
