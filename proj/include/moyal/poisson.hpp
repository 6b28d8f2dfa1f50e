#pragma once

#include <Eigen/Dense>
#include <json.hpp>

namespace moyal {

/// Real vector space V = R^n with an antisymmetric bivector sigma^{kl}.
///
/// The stored matrix is exactly antisymmetric: inputs are checked against a
/// 1e-12 tolerance and then projected onto the antisymmetric part.
class PoissonVectorSpace {
 public:
  explicit PoissonVectorSpace(const Eigen::MatrixXd& sigma);

  /// n = 2 space with sigma^{12} = s.
  static PoissonVectorSpace plane(double s);
  /// sigma = 0 on R^n.
  static PoissonVectorSpace trivial(int n);

  int dim() const { return static_cast<int>(sigma_.rows()); }
  const Eigen::MatrixXd& sigma() const { return sigma_; }

  /// sigma(xi, eta) = sigma^{kl} xi_k eta_l.
  double pairing(const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) const;

  /// Numerical rank: singular values above 1e-10 * largest.
  int rank() const;

  PoissonVectorSpace negated() const { return PoissonVectorSpace(-sigma_); }

  /// Loads {"n": int, "sigma": [[...]]}; rejects antisymmetry violations > 1e-12.
  static PoissonVectorSpace from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  Eigen::MatrixXd sigma_;
};

/// Element (xi, lambda) of the Heisenberg algebra / group V* x R.
struct HeisenbergElement {
  Eigen::VectorXd xi;
  double lambda = 0.0;
};

struct RankDecomposition {
  int rank = 0;
  Eigen::MatrixXd W_basis;    // n x rank, orthonormal columns spanning im(sharp)
  Eigen::MatrixXd V0_basis;   // n x (n - rank), orthogonal complement of W
  Eigen::MatrixXd ker_basis;  // n x (n - rank), covectors with sharp(kappa) = 0
  Eigen::MatrixXd omega;      // rank x rank, symplectic form on W in W_basis coordinates
};

/// (sharp xi)^j = sigma^{kj} xi_k, so <eta, sharp xi> = sigma(xi, eta).
Eigen::VectorXd musical_sharp(const PoissonVectorSpace& pvs, const Eigen::VectorXd& xi);

RankDecomposition rank_decomposition(const PoissonVectorSpace& pvs);

/// Symplectic Gram-Schmidt with pivoting on the largest remaining |omega_ij|.
/// Returns B with B^T omega B = [[0, I], [-I, 0]]; columns ordered (q_1..q_r, p_1..p_r).
Eigen::MatrixXd darboux_basis(const Eigen::MatrixXd& omega);

/// The standard symplectic matrix [[0, I_r], [-I_r, 0]].
Eigen::MatrixXd standard_symplectic(int r);

HeisenbergElement heisenberg_commutator(const PoissonVectorSpace& pvs,
                                        const HeisenbergElement& a,
                                        const HeisenbergElement& b);
HeisenbergElement heisenberg_product(const PoissonVectorSpace& pvs,
                                     const HeisenbergElement& a,
                                     const HeisenbergElement& b);
HeisenbergElement heisenberg_inverse(const PoissonVectorSpace& pvs,
                                     const HeisenbergElement& a);

}  // namespace moyal
