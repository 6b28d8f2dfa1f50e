#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "moyal/bundle.hpp"

namespace moyal {

/// diag(1, -1, ..., -1)
Eigen::MatrixXd minkowski(int n);

/// Lambda^T eta Lambda = eta, checked on construction.
class LorentzElement {
 public:
  explicit LorentzElement(const Eigen::MatrixXd& m, double tol = 1e-10);
  static LorentzElement identity(int n) { return LorentzElement(Eigen::MatrixXd::Identity(n, n)); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  LorentzElement operator*(const LorentzElement& o) const { return LorentzElement(m_ * o.m_, 1e-9); }
  LorentzElement inverse() const;

 private:
  Eigen::MatrixXd m_;
};

double lorentz_defect(const Eigen::MatrixXd& m);

/// Basis of o(1, n-1): boosts K_i then rotations J_ij (i < j).
std::vector<Eigen::MatrixXd> lorentz_algebra_basis(int n);

/// Matrix exponential by scaling and squaring with a Taylor core.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// exp of a Gaussian combination of the algebra basis, entries scaled by `scale`.
LorentzElement random_lorentz(std::mt19937_64& rng, int n, double scale = 1.0);

/// Lambda sigma0 Lambda^T
Eigen::MatrixXd orbit_point(const LorentzElement& g, const Eigen::MatrixXd& sigma0);

/// The standard reference form (0 1; -1 0) in 2x2 blocks.
Eigen::MatrixXd dfr_sigma0();

/// Coefficients (columns) over lorentz_algebra_basis of the stabilizer algebra of sigma0.
Eigen::MatrixXd stabilizer_algebra(const Eigen::MatrixXd& sigma0, double tol = 1e-10);
int stabilizer_algebra_dim(const Eigen::MatrixXd& sigma0, double tol = 1e-10);

/// Rank of the finite-difference orbit map derivative at sigma = g sigma0 g^T.
int orbit_local_dim(const Eigen::MatrixXd& sigma, double h = 1e-6, double tol = 1e-6);

int numeric_rank(const Eigen::MatrixXd& m, double tol = 1e-9);

struct OrbitSample {
  Eigen::MatrixXd sigma0;
  std::vector<LorentzElement> elements;
  std::vector<Eigen::MatrixXd> points;
};

/// k elements; element i draws from its own stream seeded by (seed, i), so the sample is
/// independent of evaluation order. Element 0 is the identity when include_identity.
OrbitSample sample_orbit(const Eigen::MatrixXd& sigma0, int k, std::uint64_t seed, double scale = 1.0,
                         bool include_identity = false);

/// Tautological bundle: fiber tensor at sigma is sigma itself. Throws RankError if ranks differ.
PoissonBundle orbit_bundle(const OrbitSample& s);
PoissonBundle orbit_bundle(const Eigen::MatrixXd& sigma0, int k, std::uint64_t seed);

/// 1/2 sigma^{mu nu} sigma_{mu nu}, indices lowered with eta.
double quadratic_invariant(const Eigen::MatrixXd& sigma);
/// |Pf| of the lowered form (4x4 only).
double pfaffian_magnitude(const Eigen::MatrixXd& sigma);

/// Checks that [g, u0] and [gh, h^{-1} u0] give the same (coset, vector) under
/// [g, u] -> (g sigma0 g^T, g u). Throws ArgumentError if h does not fix sigma0.
bool trivialization_consistency(const LorentzElement& g, const LorentzElement& h, const Eigen::VectorXd& u0,
                                const Eigen::MatrixXd& sigma0, double tol = 1e-10);

struct TangentFiber {
  Eigen::MatrixXd frame;  // columns e_a with frame^T metric frame = eta
  Eigen::MatrixXd sigma;  // frame sigma0 frame^T, coordinate components
};

/// Orthonormal frame by Gram-Schmidt against the metric, then sigma0 carried into coordinates.
/// Throws ArgumentError unless the metric has signature (1, n-1).
TangentFiber tangent_dfr_data(const Eigen::MatrixXd& metric, const Eigen::MatrixXd& sigma0);

}  // namespace moyal
