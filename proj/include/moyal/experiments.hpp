#pragma once

// Corpora and sweeps shared by the CLI and the acceptance runner.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "moyal/bundle.hpp"
#include "moyal/grid.hpp"
#include "moyal/planewave.hpp"
#include "moyal/poisson.hpp"
#include "moyal/weyl.hpp"

namespace moyal::experiments {

struct NamedFunction {
  std::string name;
  GridFunction f;
};

/// Gaussian-type Schwartz surrogates resolvable on `spec`: fixed shapes first, then
/// `extra` random ones drawn from `seed`. Widths stay in [max(0.5, 6h/pi), L/6.2].
std::vector<NamedFunction> grid_corpus(const GridSpec& spec, std::uint64_t seed, int extra = 0);

/// Distinct unit plane waves e_xi with xi on the dual lattice of spec, |label| <= kmax; e_0 first.
std::vector<std::pair<std::string, PlaneWaveSum>> planewave_corpus(const GridSpec& spec, std::uint64_t seed,
                                                                   int count, int kmax = 4);

/// Discretization allowance for ||fcheck||_1 <= (2pi)^n s_{2n,2n}(f):
/// the spectral mass in the outer two frequency shells plus (2pi)^n times the
/// largest sample in the outer two position shells (periodization error).
double eps_disc(const GridFunction& f);

struct EstimateRow {
  std::string name;
  int n = 0;
  int p = 0, q = 0;
  double op_norm = 0;        // ||L_f||, lower end of the power-iteration bracket
  double l1 = 0;             // ||fcheck||_1
  double seminorm_bound = 0; // (2pi)^n s_{2n,2n}(f)
  double eps = 0;            // eps_disc(f)
  double product = 0;        // s_{p,q}(f * g), g the next corpus entry
  double product_scale = 0;  // s_{0,p+q}(f) s_{p+2n,q+2n}(g)
  double ratio = 0;          // product / product_scale
  double constant = 0;       // frozen C(sigma,p,q), 0 when none supplied
  double slack_norm() const { return l1 - op_norm; }
  double slack_l1() const { return seminorm_bound + eps - l1; }
  double slack_product() const { return constant > 0 ? constant * product_scale - product : 0.0; }
};

struct EstimatesConfig {
  double sigma12 = 1.0;  // Poisson tensor for n = 2; n = 1 is necessarily commutative
  GridSpec grid1{1, 12.0, 256};
  GridSpec grid2{2, 8.0, 32};
  std::uint64_t seed = 1;
  int extra = 2;   // random corpus members per dimension
  int max_pq = 1;  // p, q in [0, max_pq]
  NormOptions norm;
  std::vector<int> dims{1, 2};
  /// key "n:p:q" -> C
  std::map<std::string, double> constants;
};

std::string constant_key(int n, int p, int q);

std::vector<EstimateRow> estimates_sweep(const EstimatesConfig& cfg);

/// Largest measured ratio per (n,p,q), times `margin`.
std::map<std::string, double> fit_constants(const std::vector<EstimateRow>& rows, double margin);

struct NormRow {
  std::string name;
  std::string kind;  // planewave or grid
  double op_norm = 0, upper = 0, l1 = 0;
  double seminorm_bound = 0, eps = 0;  // as in EstimateRow
  int iterations = 0;
  double slack() const { return l1 - op_norm; }
  double slack_l1() const { return seminorm_bound + eps - l1; }
};

/// Only the regular-representation norm of W(f) in the fiber sigma on spec.
std::vector<NormRow> norms_sweep(const PoissonVectorSpace& pvs, const GridSpec& spec, std::uint64_t seed,
                                 int planewaves, int gaussians, const NormOptions& opt);

struct ApproxRow {
  std::string name;
  int k = 0;
  double residual = 0;  // s_{0,0}(chi_k * f - f)
};

std::vector<ApproxRow> approx_identity_table(const PoissonVectorSpace& pvs, const GridSpec& spec,
                                             const std::vector<NamedFunction>& fs, int kmax, double shell = 1.5);

/// Strictly decreasing in k and below `final_tol` at the last k, per function.
bool approx_identity_ok(const std::vector<ApproxRow>& rows, double final_tol, std::string* why = nullptr);

/// Blocks of size 1..max_dim, 0..max_blocks per point of `base`, at least one block overall.
FiniteCStarModuleAlgebra random_finite_algebra(std::mt19937_64& rng, const BaseSpace& base, int max_blocks,
                                               int max_dim);

struct BundleSweepConfig {
  std::uint64_t seed = 1;
  int algebras = 20;
  int max_points = 5;
  int max_blocks = 2;
  int max_dim = 4;
  int targets = 3;                  // size of the base for the push-forward check
  std::optional<BaseSpace> base;    // fixed base instead of random ones
  double tol = 1e-12;
};

struct BundleRow {
  int trial = 0;
  std::string check;     // roundtrip or fiber_formula
  int points = 0;
  int dim = 0;           // dim A, or sum of dim (f#A)_y
  int dim_fibers = 0;    // sum of SR fiber dims, or of the preimage fiber dims
  double defect = 0;
  bool ok = false;
  std::string note;
};

std::vector<BundleRow> bundle_sweep(const BundleSweepConfig& cfg);

struct OrbitRow {
  int index = 0;
  int rank = 0;
  double quadratic = 0, pfaffian = 0;  // pfaffian only for n = 4
  double equivariance = 0;             // |g_i g_{i+1} . s0 - g_i . (g_{i+1} . s0)| relative to the entries
  double scale = 0;                    // max |entry| of the point
};

struct OrbitSummary {
  int rank0 = 0;
  int stabilizer_dim = 0, orbit_dim = 0, group_dim = 0;
  double max_equivariance = 0;
  double max_quadratic_drift = 0, max_pfaffian_drift = 0;  // relative to max(1, scale^2)
  bool rank_constant = true;
};

std::vector<OrbitRow> orbit_sweep(const Eigen::MatrixXd& sigma0, int samples, std::uint64_t seed, double scale,
                                  OrbitSummary* summary);

}  // namespace moyal::experiments
