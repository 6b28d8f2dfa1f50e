#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "moyal/grid.hpp"

namespace moyal {

struct PlaneWaveTerm {
  cplx coeff;
  Eigen::VectorXd freq;
};

/// Finite combination sum_j c_j e_{xi_j} with e_xi(v) = exp(i <xi, v>).
///
/// Terms whose frequencies agree within `tol` (max-norm) are merged on insertion,
/// so the term list is canonical up to ordering.
class PlaneWaveSum {
 public:
  static constexpr double kDefaultTol = 1e-9;

  explicit PlaneWaveSum(int n, double tol = kDefaultTol);
  static PlaneWaveSum phase(const Eigen::VectorXd& xi, cplx c = 1.0);

  int dim() const { return n_; }
  double tol() const { return tol_; }
  const std::vector<PlaneWaveTerm>& terms() const { return terms_; }
  size_t size() const { return terms_.size(); }

  /// Adds c e_xi, merging with an existing term at the same frequency.
  void add(cplx c, const Eigen::VectorXd& xi);
  /// Removes terms with |c| <= cut.
  void prune(double cut);

  /// Involution: conjugate coefficients, negate frequencies.
  PlaneWaveSum conjugate() const;

  cplx eval(const Eigen::VectorXd& x) const;

  PlaneWaveSum& operator+=(const PlaneWaveSum& o);
  PlaneWaveSum& operator-=(const PlaneWaveSum& o);
  PlaneWaveSum& operator*=(cplx s);

  /// Canonical order (lexicographic on frequency) for printing and comparison.
  PlaneWaveSum sorted() const;

  static PlaneWaveSum from_json(const nlohmann::json& j, int n = -1);
  nlohmann::json to_json() const;

 private:
  int n_;
  double tol_;
  std::vector<PlaneWaveTerm> terms_;
};

PlaneWaveSum operator+(PlaneWaveSum a, const PlaneWaveSum& b);
PlaneWaveSum operator-(PlaneWaveSum a, const PlaneWaveSum& b);
PlaneWaveSum operator*(cplx s, PlaneWaveSum a);

/// Largest coefficient of a - b after merging.
double max_coeff_diff(const PlaneWaveSum& a, const PlaneWaveSum& b);
/// Identical term lists up to ordering: same frequencies bit-for-bit, same coefficients.
bool identical(const PlaneWaveSum& a, const PlaneWaveSum& b);

/// (a (x) b)(v0, w) = a(v0) b(w), frequencies concatenated.
PlaneWaveSum tensor_product(const PlaneWaveSum& a, const PlaneWaveSum& b);

cplx eval_planewave(const PlaneWaveSum& pw, const Eigen::VectorXd& x);
/// Samples on the grid; every frequency must lie on the dual lattice.
GridFunction sample_planewave(const PlaneWaveSum& pw, const GridSpec& spec);
/// Exact spectrum of an on-lattice plane-wave sum (weights divided by the dual cell volume).
GridFunction planewave_spectrum(const PlaneWaveSum& pw, const GridSpec& spec);

}  // namespace moyal
