#include "moyal/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "moyal/errors.hpp"

namespace moyal::kernels {

namespace {

// Row-major multi-index counter, last axis fastest.
struct Counter {
  int n, N;
  std::vector<int> idx;
  Counter(int n_, int N_) : n(n_), N(N_), idx(n_, 0) {}
  void next() {
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < N) return;
      idx[a] = 0;
    }
  }
};

inline int wrap_label(int k, int N) {
  const int h = N / 2;
  int m = (k + h) % N;
  if (m < 0) m += N;
  return m - h;
}

// For one retained frequency k and each axis a, the entry at output coordinate
// o_a holds the flat-index contribution of the partner index m_a = wrap(o_a - k_a)
// and the phase factor exp(-i s_a m_a).
struct AxisEntry {
  std::int64_t offset;
  cplx phase;
};

struct Prepared {
  int n = 0, N = 0;
  std::vector<AxisEntry> table;  // terms * n * N
  std::vector<cplx> aval;
  const AxisEntry* row(size_t t, int a) const { return &table[(t * n + a) * N]; }
};

Prepared prepare(const TwistedArgs& args) {
  const GridSpec& s = *args.spec;
  const int n = s.n, N = s.N;
  const double step = s.dual_step();
  std::vector<std::int64_t> stride(n, 1);
  for (int a = n - 2; a >= 0; --a) stride[a] = stride[a + 1] * N;
  Prepared p;
  p.n = n;
  p.N = N;
  const size_t T = args.retained.size();
  p.table.resize(T * n * N);
  p.aval.resize(T);
  std::vector<int> k(n);
  for (size_t t = 0; t < T; ++t) {
    std::int64_t flat = args.retained[t];
    for (int a = n - 1; a >= 0; --a) {
      k[a] = static_cast<int>(flat % N) - N / 2;
      flat /= N;
    }
    p.aval[t] = args.a[args.retained[t]];
    for (int a = 0; a < n; ++a) {
      // phase = -(1/2) step^2 (l^T sigma r) = -sum_a s_a m_a with the retained label fixed
      double sa = 0.0;
      for (int i = 0; i < n; ++i) sa += args.retained_is_left ? k[i] * args.sigma(i, a) : args.sigma(a, i) * k[i];
      sa *= 0.5 * step * step;
      AxisEntry* row = &p.table[(t * n + a) * N];
      for (int o = 0; o < N; ++o) {
        const int m = wrap_label(o - N / 2 - k[a], N);
        row[o] = {(m + N / 2) * stride[a], std::polar(1.0, -sa * m)};
      }
    }
  }
  return p;
}

inline cplx gather_one(const Prepared& p, std::span<const cplx> b, const std::vector<int>& oidx) {
  cplx acc{0.0, 0.0};
  const size_t T = p.aval.size();
  for (size_t t = 0; t < T; ++t) {
    std::int64_t flat = 0;
    cplx ph = p.aval[t];
    for (int a = 0; a < p.n; ++a) {
      const AxisEntry& e = p.row(t, a)[oidx[a]];
      flat += e.offset;
      ph *= e.phase;
    }
    acc += ph * b[flat];
  }
  return acc;
}

void check(const TwistedArgs& args, std::span<cplx> out) {
  const auto sz = static_cast<size_t>(args.spec->size());
  if (args.a.size() != sz || args.b.size() != sz || out.size() != sz)
    throw ArgumentError("twisted_gather: size mismatch");
  if (args.sigma.rows() != args.spec->n || args.sigma.cols() != args.spec->n)
    throw ArgumentError("twisted_gather: sigma has wrong shape");
}

}  // namespace

void twisted_gather_serial(const TwistedArgs& args, std::span<cplx> out) {
  check(args, out);
  const GridSpec& s = *args.spec;
  const Prepared p = prepare(args);
  const double cell = s.dual_cell_volume();
  Counter c(s.n, s.N);
  for (std::int64_t o = 0; o < s.size(); ++o, c.next()) out[o] = cell * gather_one(p, args.b, c.idx);
}

void twisted_gather_omp(const TwistedArgs& args, std::span<cplx> out) {
  check(args, out);
  const GridSpec& s = *args.spec;
  const Prepared p = prepare(args);
  const double cell = s.dual_cell_volume();
  // rows along the last axis are the unit of work
  const std::int64_t rows = s.size() / s.N;
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    std::vector<int> idx(s.n);
    std::int64_t rem = r;
    for (int a = s.n - 2; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % s.N);
      rem /= s.N;
    }
    for (int j = 0; j < s.N; ++j) {
      idx[s.n - 1] = j;
      out[r * s.N + j] = cell * gather_one(p, args.b, idx);
    }
  }
}

namespace {

// Adds coeff * e^{i<xi,x>} g(x - shift) into acc.
void add_term(const GridFunction& gcheck, const GridFunction& gpos, const ShiftTerm& t, std::vector<cplx>& scratch,
              std::vector<cplx>& tables, std::span<cplx> acc) {
  const GridSpec& s = gcheck.spec;
  const int n = s.n, N = s.N;
  const double h = s.spacing(), step = s.dual_step();
  tables.resize(static_cast<size_t>(2 * n * N));
  cplx* mod = tables.data();
  cplx* ramp = tables.data() + n * N;
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < N; ++j) {
      mod[a * N + j] = std::polar(1.0, t.xi(a) * (-s.L + j * h));
      ramp[a * N + j] = std::polar(1.0, -(j - N / 2) * step * t.shift(a));
    }
  Eigen::VectorXi steps;
  const bool exact = s.on_position_lattice(t.shift, &steps);
  const std::int64_t total = s.size();
  if (exact) {
    std::vector<std::int64_t> stride(n, 1);
    for (int a = n - 2; a >= 0; --a) stride[a] = stride[a + 1] * N;
    std::vector<int> src(n);
    for (int a = 0; a < n; ++a) src[a] = ((-steps(a)) % N + N) % N;
    Counter c(n, N);
    for (std::int64_t m = 0; m < total; ++m) {
      cplx f = t.coeff;
      std::int64_t from = 0;
      for (int a = 0; a < n; ++a) {
        f *= mod[a * N + c.idx[a]];
        from += stride[a] * ((c.idx[a] + src[a]) % N);
      }
      acc[m] += f * gpos.values[from];
      c.next();
    }
    return;
  }
  {
    Counter c(n, N);
    for (std::int64_t m = 0; m < total; ++m) {
      cplx f = gcheck.values[m];
      for (int a = 0; a < n; ++a) f *= ramp[a * N + c.idx[a]];
      scratch[m] = f;
      c.next();
    }
  }
  const GridFunction shifted = fourier_forward(GridFunction(s, Domain::frequency, scratch));
  Counter c(n, N);
  for (std::int64_t m = 0; m < total; ++m) {
    cplx f = t.coeff;
    for (int a = 0; a < n; ++a) f *= mod[a * N + c.idx[a]];
    acc[m] += f * shifted.values[m];
    c.next();
  }
}

void check_shift(const GridFunction& gcheck, std::span<const ShiftTerm> terms) {
  if (gcheck.domain != Domain::frequency) throw ArgumentError("shift_accumulate expects a spectrum");
  for (const auto& t : terms)
    if (t.xi.size() != gcheck.spec.n || t.shift.size() != gcheck.spec.n)
      throw ArgumentError("shift_accumulate: term has wrong dimension");
}

}  // namespace

GridFunction shift_accumulate_serial(const GridFunction& gcheck, std::span<const ShiftTerm> terms) {
  check_shift(gcheck, terms);
  const GridFunction gpos = fourier_forward(gcheck);
  GridFunction out(gcheck.spec, Domain::position);
  std::vector<cplx> scratch(gcheck.values.size()), tables;
  for (const auto& t : terms) add_term(gcheck, gpos, t, scratch, tables, out.values);
  return out;
}

GridFunction shift_accumulate_omp(const GridFunction& gcheck, std::span<const ShiftTerm> terms) {
  check_shift(gcheck, terms);
  const GridFunction gpos = fourier_forward(gcheck);
  const auto sz = gcheck.values.size();
  const std::int64_t nblocks = (static_cast<std::int64_t>(terms.size()) + kShiftBlock - 1) / kShiftBlock;
  std::vector<std::vector<cplx>> partial(static_cast<size_t>(nblocks));
#pragma omp parallel
  {
    std::vector<cplx> scratch(sz), tables;
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t b = 0; b < nblocks; ++b) {
      auto& acc = partial[b];
      acc.assign(sz, cplx{0.0, 0.0});
      const size_t lo = static_cast<size_t>(b) * kShiftBlock;
      const size_t hi = std::min(terms.size(), lo + kShiftBlock);
      for (size_t t = lo; t < hi; ++t) add_term(gcheck, gpos, terms[t], scratch, tables, acc);
    }
  }
  GridFunction out(gcheck.spec, Domain::position);
  for (const auto& acc : partial)
    for (size_t i = 0; i < sz; ++i) out.values[i] += acc[i];
  return out;
}

LatticeWeyl::LatticeWeyl(const GridSpec& spec, std::vector<Term> terms) : spec_(spec) {
  const int n = spec.n, N = spec.N;
  coeff_.reserve(terms.size());
  steps_.reserve(terms.size() * n);
  phase_.resize(terms.size() * n * N);
  for (size_t t = 0; t < terms.size(); ++t) {
    const auto& tm = terms[t];
    if (tm.label.size() != n || tm.steps.size() != n) throw ArgumentError("LatticeWeyl: term has wrong dimension");
    coeff_.push_back(tm.coeff);
    for (int a = 0; a < n; ++a) {
      steps_.push_back(((tm.steps(a) % N) + N) % N);
      // e^{i pi k (-1 + 2 j / N)} = (-1)^k exp(2 pi i k j / N)
      const double parity = (tm.label(a) % 2 == 0) ? 1.0 : -1.0;
      for (int j = 0; j < N; ++j) {
        const long kj = ((static_cast<long>(tm.label(a)) * j) % N + N) % N;
        phase_[(t * n + a) * N + j] = parity * std::polar(1.0, 2.0 * std::numbers::pi * kj / N);
      }
    }
  }
}

void LatticeWeyl::row(std::int64_t r, std::span<const cplx> in, std::span<cplx> out, std::vector<int>& idx) const {
  const int n = spec_.n, N = spec_.N;
  // leading multi-index of row r
  std::int64_t rem = r;
  for (int a = n - 2; a >= 0; --a) {
    idx[a] = static_cast<int>(rem % N);
    rem /= N;
  }
  cplx* o = out.data() + r * N;
  std::fill(o, o + N, cplx{0.0, 0.0});
  for (size_t t = 0; t < coeff_.size(); ++t) {
    const int* st = &steps_[t * n];
    const cplx* ph = &phase_[t * n * N];
    cplx c = coeff_[t];
    std::int64_t src = 0;
    for (int a = 0; a < n - 1; ++a) {
      c *= ph[a * N + idx[a]];
      int si = idx[a] - st[a];
      if (si < 0) si += N;
      src = src * N + si;
    }
    const cplx* in_row = in.data() + src * N;
    const cplx* last = ph + (n - 1) * N;
    const int s = st[n - 1];
    // j - s wraps at j = s
    for (int j = 0; j < s; ++j) o[j] += c * last[j] * in_row[j - s + N];
    for (int j = s; j < N; ++j) o[j] += c * last[j] * in_row[j - s];
  }
}

void LatticeWeyl::apply_serial(std::span<const cplx> in, std::span<cplx> out) const {
  std::vector<int> idx(spec_.n);
  const std::int64_t rows = spec_.size() / spec_.N;
  for (std::int64_t r = 0; r < rows; ++r) row(r, in, out, idx);
}

void LatticeWeyl::apply_omp(std::span<const cplx> in, std::span<cplx> out) const {
  const std::int64_t rows = spec_.size() / spec_.N;
#pragma omp parallel
  {
    std::vector<int> idx(spec_.n);
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) row(r, in, out, idx);
  }
}

Eigen::MatrixXcd assemble_columns_serial(std::int64_t dim, const ApplyFn& apply) {
  Eigen::MatrixXcd m(dim, dim);
  std::vector<cplx> e(static_cast<size_t>(dim), 0.0), col(static_cast<size_t>(dim));
  for (std::int64_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e, col);
    e[j] = 0.0;
    for (std::int64_t i = 0; i < dim; ++i) m(i, j) = col[i];
  }
  return m;
}

Eigen::MatrixXcd assemble_columns_omp(std::int64_t dim, const ApplyFn& apply) {
  Eigen::MatrixXcd m(dim, dim);
#pragma omp parallel
  {
    std::vector<cplx> e(static_cast<size_t>(dim), 0.0), col(static_cast<size_t>(dim));
#pragma omp for schedule(dynamic, 8)
    for (std::int64_t j = 0; j < dim; ++j) {
      e[j] = 1.0;
      apply(e, col);
      e[j] = 0.0;
      for (std::int64_t i = 0; i < dim; ++i) m(i, j) = col[i];
    }
  }
  return m;
}

}  // namespace moyal::kernels
