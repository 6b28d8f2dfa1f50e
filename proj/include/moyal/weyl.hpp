#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "moyal/grid.hpp"
#include "moyal/planewave.hpp"
#include "moyal/poisson.hpp"
#include "moyal/star.hpp"

namespace moyal {

/// Matrix-free operator on C^dim.
struct LinearOperator {
  std::int64_t dim = 0;
  std::function<void(std::span<const cplx>, std::span<cplx>)> apply;
  std::function<void(std::span<const cplx>, std::span<cplx>)> apply_adjoint;

  std::vector<cplx> operator()(std::span<const cplx> x) const;
};

struct OperatorMatrix {
  Eigen::MatrixXcd entries;

  static constexpr std::int64_t kMaxDim = 4096;

  std::int64_t dim() const { return entries.rows(); }
  /// ||U* U - I||_max
  double unitarity_defect() const;
  bool is_unitary(double tol = 1e-10) const { return unitarity_defect() < tol; }
};

/// Dense form of an operator; refuses carriers above OperatorMatrix::kMaxDim.
OperatorMatrix to_matrix(const LinearOperator& op, bool parallel = true);
LinearOperator as_operator(const OperatorMatrix& m);

LinearOperator compose(const LinearOperator& a, const LinearOperator& b);  // a b
/// sum_j c_j A_j
LinearOperator linear_combination(std::vector<cplx> coeffs, std::vector<LinearOperator> ops);
LinearOperator identity_operator(std::int64_t dim);
LinearOperator zero_operator(std::int64_t dim);

struct NormOptions {
  double rel_tol = 1e-10;
  /// Values of ||A||^2 below this are treated as converged zero.
  double abs_floor = 1e-26;
  int max_iter = 5000;
  int min_iter = 8;
  std::uint64_t seed = 0x5eed;
};

struct NormResult {
  double value = 0.0;  // sqrt of the final Rayleigh quotient of A*A
  double lower = 0.0;  // certified: ||A v|| for unit v
  double upper = 0.0;  // Rayleigh bracket sqrt(mu + ||A*A v - mu v||); certified for dense input
  int iterations = 0;
};

/// Largest singular value by power iteration on A*A.  Throws NumericError with
/// the best bracket if the relative change does not fall below rel_tol.
NormResult operator_norm(const LinearOperator& a, const NormOptions& opt = {});
/// Dense variant: the upper end is also capped by min(||A||_F, sqrt(||A||_1 ||A||_inf)).
NormResult operator_norm(const OperatorMatrix& a, const NormOptions& opt = {});

/// A unitary representation xi -> pi(xi) of a Heisenberg group (central part e^{i lambda}).
struct Representation {
  std::int64_t dim = 0;
  int n = 0;  // dimension of the covector argument
  std::function<LinearOperator(const Eigen::VectorXd& xi)> element;
  /// Optional fused form of sum_j c_j pi(xi_j); must agree with summing element().
  std::function<LinearOperator(const std::vector<cplx>&, const std::vector<Eigen::VectorXd>&)> combine;
};

enum class RepKind { regular, doubled, irrep };

struct RepSpec {
  RepKind kind = RepKind::regular;
  PoissonVectorSpace pvs;
  GridSpec spec;
  std::optional<Eigen::VectorXd> weight;  // highest weight v in V for irreps

  RepSpec(RepKind k, PoissonVectorSpace p, const GridSpec& s, std::optional<Eigen::VectorXd> w = std::nullopt)
      : kind(k), pvs(std::move(p)), spec(s), weight(std::move(w)) {}
};

/// (pi(xi) psi)(x) = e^{i<xi,x>} psi(x - sharp(xi)/2) on grid samples.
LinearOperator regular_rep_op(const RepSpec& rep, const Eigen::VectorXd& xi);
OperatorMatrix regular_rep(const RepSpec& rep, const Eigen::VectorXd& xi);
/// The fused combination uses the lattice kernel when every shift is a whole number of grid steps.
Representation regular_representation(const RepSpec& rep);
/// sum_j c_j pi(xi_j) by summing the individual operators (reference for the fused path).
LinearOperator combine_elements(const Representation& pi, const std::vector<cplx>& c,
                                const std::vector<Eigen::VectorXd>& xis);

/// W(f) = sum_j c_j pi(xi_j) for a plane-wave sum.
LinearOperator weyl_quantize(const Representation& pi, const PlaneWaveSum& f);
/// W(f) = sum_k fcheck(xi_k) pi(xi_k) (pi/L)^n over retained lattice frequencies.
LinearOperator weyl_quantize(const Representation& pi, const GridFunction& f, double floor = 1e-14);

/// h -> f * h and h -> h * g as operators on grid samples.
LinearOperator left_translation(const StarContext& ctx, const GridFunction& f);
LinearOperator right_translation(const StarContext& ctx, const GridFunction& g);

/// Discrete ||fcheck||_1.
double norm_bound_l1(const StarContext& ctx, const GridFunction& f);

/// (W(x, xi, lambda) psi)(z) = e^{-i<xi, z - x/2> + i lambda} psi(z - x).
LinearOperator doubled_rep_op(const GridSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                              double lambda);
OperatorMatrix doubled_rep(const GridSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                           double lambda);
/// The symbol g' with W(x,xi,l) R(g) W(x,xi,l)^{-1} = R(g'): g'(z) = g(z - x - sharp(xi)/2).
/// Multiplication by e_eta is L(e_eta) after a shift, and L commutes with R, which leaves a translation.
GridFunction doubled_conjugate_symbol(const StarContext& ctx, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                                      const GridFunction& g);
/// Omega((x,xi),(y,eta)) = xi(y) - eta(x).
double doubled_symplectic(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& eta);

/// Schroedinger operator pi_omega(u, w, lambda) psi(s) = e^{i lambda} e^{i u.(s + w/2)} psi(s + w)
/// for the standard symplectic form on R^{2r}, carried by a grid over R^r.
LinearOperator schroedinger_op(const GridSpec& spec, const HeisenbergElement& eta);

/// Irreducible representation data: kernel/Darboux split of V* and the weight v.
struct IrrepData {
  RankDecomposition dec;
  Eigen::MatrixXd darboux;      // B with B^T G B = J, G = W^T sigma W
  Eigen::MatrixXd to_darboux;   // B^{-1} W^T: covector -> Darboux coordinates
  Eigen::VectorXd weight;       // v in V
  GridSpec carrier;             // grid over R^r
};
IrrepData make_irrep(const RepSpec& rep);
/// pi_[v](xi_ker, eta) = e^{i<xi_ker, v>} pi_omega(eta).
LinearOperator irrep_op(const IrrepData& ir, const Eigen::VectorXd& xi_ker, const HeisenbergElement& eta);
/// The irrep as a representation of H_sigma: xi splits into its kernel and W* parts.
Representation irrep_representation(const IrrepData& ir);

/// pi_W(xi) = W(e_xi).
using QuantizationMap = std::function<LinearOperator(const PlaneWaveSum&)>;
LinearOperator rep_from_quantization(const QuantizationMap& w, const Eigen::VectorXd& xi);

/// max_j ||f * g_j||_2 over a fixed family of Gaussian probes g_j.
double faithfulness_witness(const StarContext& ctx, const GridFunction& f);

}  // namespace moyal
