#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "moyal/grid.hpp"
#include "moyal/planewave.hpp"
#include "moyal/poisson.hpp"
#include "moyal/weyl.hpp"

namespace moyal {

struct BasePoint {
  std::string id;
  Eigen::VectorXd coords;
  double weight = 1.0;
  bool compact = true;
};

struct BaseSpace {
  std::vector<BasePoint> points;
  /// True for a genuinely finite space; false for samples of a continuum.
  bool finite = true;
  /// Neighbor lists by point index; only used by the semicontinuity sweep.
  std::vector<std::vector<int>> neighbors;

  BaseSpace() = default;
  BaseSpace(std::vector<BasePoint> pts, bool finite_flag = true);
  /// Points named by ids, no coordinates.
  static BaseSpace named(const std::vector<std::string>& ids, bool finite_flag = true);

  int size() const { return static_cast<int>(points.size()); }
  int index_of(const std::string& id) const;  // throws ArgumentError
  /// Neighbor graph: each point joined to the previous and next in order.
  void chain_neighbors();
};

/// Fibers are held by shared pointer so pullbacks can share them.
class PoissonBundle {
 public:
  PoissonBundle(BaseSpace base, int n, std::vector<std::shared_ptr<const PoissonVectorSpace>> fibers);
  PoissonBundle(BaseSpace base, const std::vector<Eigen::MatrixXd>& sigma_at);
  static PoissonBundle constant(BaseSpace base, const PoissonVectorSpace& pvs);

  const BaseSpace& base() const { return base_; }
  int n() const { return n_; }
  int size() const { return base_.size(); }
  const PoissonVectorSpace& fiber(int i) const { return *fibers_.at(i); }
  const std::shared_ptr<const PoissonVectorSpace>& fiber_ptr(int i) const { return fibers_.at(i); }
  const PoissonVectorSpace& fiber(const std::string& id) const { return fiber(base_.index_of(id)); }

  /// {base: [{id, coords, weight, compact}], n, sigma_at: {id: [[...]]}, finite?, neighbors?}
  static PoissonBundle from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  BaseSpace base_;
  int n_;
  std::vector<std::shared_ptr<const PoissonVectorSpace>> fibers_;
};

using FiberValue = std::variant<PlaneWaveSum, GridFunction>;

struct SectionOverBase {
  std::shared_ptr<const PoissonBundle> bundle;
  std::vector<FiberValue> values;  // indexed like bundle->base().points

  SectionOverBase(std::shared_ptr<const PoissonBundle> b, std::vector<FiberValue> v);
  static SectionOverBase from_function(std::shared_ptr<const PoissonBundle> b,
                                       const std::function<FiberValue(int)>& value_at);
  bool is_grid() const;
};

/// Pointwise product phi(x) *_{sigma(x)} psi(x). Grid fibers need a common grid.
SectionOverBase fiber_star(const SectionOverBase& phi, const SectionOverBase& psi);

/// max over K of seminorm(phi(x), p, q); grid fibers only.
double section_sup_seminorm(const SectionOverBase& phi, int p, int q, const std::vector<std::string>& K);

SectionOverBase module_action(const std::vector<double>& f, const SectionOverBase& phi);
const FiberValue& evaluation(const SectionOverBase& phi, const std::string& id);

/// max over x of ||L_{phi(x)}|| for the fiber product sigma(x). Plane-wave fibers are
/// sampled on `spec`; grid fibers must already live on it.
double cstar_fiber_sup_norm(const SectionOverBase& phi, const GridSpec& spec, const NormOptions& opt = {});

// ---------------------------------------------------------------------------
// Finite C0(X)-algebras: A = sum_b M_{d_b}, with C(X) acting centrally. A central
// *-homomorphism C(X) -> Z(A) sends f to f(x_b) on block b, so the action is
// recorded as one base point per block; a block with no point is killed by every f.

struct FiniteCStarModuleAlgebra {
  BaseSpace base;
  std::vector<int> block_dims;
  std::vector<std::optional<int>> block_point;

  FiniteCStarModuleAlgebra(BaseSpace b, std::vector<int> dims, std::vector<std::optional<int>> points);
  /// Block list given per base point: fibers[x] = dims of the blocks sitting over x.
  static FiniteCStarModuleAlgebra pointwise(BaseSpace b, const std::vector<std::vector<int>>& fibers);

  int dim() const;  // sum d_b^2, complex dimension
  int block_offset(int b) const;
  /// Matrix of Phi(f) acting on A, in the entry basis (block-major, row-major inside a block).
  Eigen::MatrixXd action_matrix(const Eigen::VectorXd& f) const;
  bool nondegenerate() const;

  // elements as coordinate vectors
  Eigen::VectorXcd multiply(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const;
  Eigen::VectorXcd adjoint(const Eigen::VectorXcd& a) const;
  double norm(const Eigen::VectorXcd& a) const;  // max block operator norm
};

struct QuotientFiber {
  int point = -1;
  int dim = 0;                   // dim A / Phi(I_x)A
  int ideal_dim = 0;             // dim Phi(I_x)A
  Eigen::MatrixXd quotient;      // dim x dim A, kernel = Phi(I_x)A, orthonormal rows
  std::vector<int> blocks;       // blocks of A that survive at x, in order
  std::vector<int> fiber_dims;   // their sizes
  Eigen::MatrixXd to_fiber;      // fiber entries <- quotient coordinates
  Eigen::MatrixXd from_fiber;    // inverse of to_fiber
};

QuotientFiber sr_fiber(const FiniteCStarModuleAlgebra& A, int x);
QuotientFiber sr_fiber(const FiniteCStarModuleAlgebra& A, const std::string& id);

/// Multiplies two fiber elements given in fiber entry coordinates.
Eigen::VectorXcd fiber_multiply(const QuotientFiber& q, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);
Eigen::VectorXcd fiber_adjoint(const QuotientFiber& q, const Eigen::VectorXcd& a);
double fiber_norm(const QuotientFiber& q, const Eigen::VectorXcd& a);

struct RoundtripReport {
  bool nondegenerate = false;
  int dim_algebra = 0;
  int dim_sections = 0;       // sum of fiber dims
  bool bijective = false;
  double multiplication_defect = 0.0;  // max over basis pairs of |T(e_i e_j) - T(e_i) T(e_j)|
  double involution_defect = 0.0;
  double isometry_defect = 0.0;        // on random samples
  std::string failure;                 // empty on success
  bool ok() const { return failure.empty(); }
};

RoundtripReport sectional_roundtrip(const FiniteCStarModuleAlgebra& A, std::uint64_t seed = 7);

/// f given as target index per source point. (f* B)_x shares the fiber object of B_{f(x)}.
PoissonBundle pullback_bundle(const std::vector<int>& f, const BaseSpace& source, const PoissonBundle& B);

FiniteCStarModuleAlgebra change_base_ring(const std::vector<int>& f, const BaseSpace& target,
                                          const FiniteCStarModuleAlgebra& A);

struct FiberFormulaReport {
  int point = -1;
  int dim_pushed = 0;     // dim (f#A)_y
  int dim_preimage = 0;   // sum of dim A_x over f^{-1}(y)
  double map_defect = 0;  // mismatch between the two quotient maps, in fiber entries
  bool ok = false;
};

/// Compares (f#A)_y with the direct sum of A-fibers over f^{-1}(y) for every y.
std::vector<FiberFormulaReport> fiber_formula_check(const std::vector<int>& f, const BaseSpace& target,
                                                    const FiniteCStarModuleAlgebra& A);

struct UscReport {
  std::vector<double> values;  // s(phi(x)) per point
  std::vector<double> excess;  // value minus min over neighbors
  std::vector<bool> violation;
  int violations = 0;
  /// Sampling can refute semicontinuity at a point, never establish it.
  static constexpr const char* kNote = "sampling check: a violation refutes upper semicontinuity, a pass proves nothing";
};

UscReport usc_sample_check(const SectionOverBase& phi, int p, int q, double jump_threshold);

}  // namespace moyal
