#pragma once

// Hot loops of the star product and operator assembly.  Each kernel has a plain
// serial version (the reference) and an OpenMP version; the OpenMP versions
// give the same answer for any thread count.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "moyal/grid.hpp"

namespace moyal::kernels {

/// Twisted convolution on the dual lattice, gathered per output frequency:
///   out[o] = cell * sum_{k in retained} a[k] b[o - k] exp(-(i/2) sigma(xi_l, xi_r))
/// where (xi_l, xi_r) = (xi_k, xi_{o-k}) if retained_is_left, else (xi_{o-k}, xi_k).
/// Index arithmetic wraps on the centered lattice (aliasing of the periodic model).
struct TwistedArgs {
  const GridSpec* spec;
  std::span<const cplx> a;             // spectrum of the retained factor
  std::span<const std::int64_t> retained;
  std::span<const cplx> b;             // spectrum of the other factor
  Eigen::MatrixXd sigma;
  bool retained_is_left = true;
};
void twisted_gather_serial(const TwistedArgs& args, std::span<cplx> out);
void twisted_gather_omp(const TwistedArgs& args, std::span<cplx> out);

/// out(x) = sum_t coeff_t exp(i <xi_t, x>) g(x - shift_t), with g given by its spectrum.
/// Integer-step shifts use an exact cyclic roll, others a Fourier phase ramp.
struct ShiftTerm {
  cplx coeff;
  Eigen::VectorXd xi;
  Eigen::VectorXd shift;
};
GridFunction shift_accumulate_serial(const GridFunction& gcheck, std::span<const ShiftTerm> terms);
/// Terms are summed in fixed blocks, then the block partials are added in block order.
GridFunction shift_accumulate_omp(const GridFunction& gcheck, std::span<const ShiftTerm> terms);
inline constexpr int kShiftBlock = 16;

/// out(x) = sum_t c_t exp(i <xi_t, x>) in(x - steps_t * h) for lattice frequencies
/// xi_t = (pi/L) label_t and integer shifts: the regular-representation Weyl
/// operator on a commensurate grid.  Tables are built once; apply is O(terms * N^n).
class LatticeWeyl {
 public:
  struct Term {
    cplx coeff;
    Eigen::VectorXi label;
    Eigen::VectorXi steps;
  };
  LatticeWeyl(const GridSpec& spec, std::vector<Term> terms);

  void apply_serial(std::span<const cplx> in, std::span<cplx> out) const;
  /// Parallel over output rows; each output entry sums terms in the same order as apply_serial.
  void apply_omp(std::span<const cplx> in, std::span<cplx> out) const;
  size_t size() const { return coeff_.size(); }

 private:
  void row(std::int64_t r, std::span<const cplx> in, std::span<cplx> out, std::vector<int>& idx) const;

  GridSpec spec_;
  std::vector<cplx> coeff_;
  std::vector<int> steps_;    // terms * n, reduced mod N
  std::vector<cplx> phase_;   // terms * n * N
};

/// Dense matrix whose j-th column is apply(e_j).
using ApplyFn = std::function<void(std::span<const cplx>, std::span<cplx>)>;
Eigen::MatrixXcd assemble_columns_serial(std::int64_t dim, const ApplyFn& apply);
Eigen::MatrixXcd assemble_columns_omp(std::int64_t dim, const ApplyFn& apply);

}  // namespace moyal::kernels
