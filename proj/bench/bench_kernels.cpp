// Serial reference against the OpenMP kernels.  Run with OMP_NUM_THREADS set to
// compare thread counts; the _serial rows do not depend on it.

#include <random>

#include <benchmark/benchmark.h>

#include "moyal/kernels.hpp"
#include "moyal/star.hpp"

using namespace moyal;

namespace {

GridSpec grid(int N) { return GridSpec::commensurate(2, N, 1.0); }

GridFunction gauss(const GridSpec& s, double cx) {
  return make_gaussian(s, Eigen::Vector2d(cx, -0.2), Eigen::Vector2d(0.9, 1.1));
}

std::vector<kernels::ShiftTerm> shift_terms(const GridSpec& s, int count) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> lab(-6, 6);
  std::vector<kernels::ShiftTerm> t;
  for (int k = 0; k < count; ++k) {
    const Eigen::VectorXd xi = s.dual_step() * Eigen::Vector2d(lab(rng), lab(rng));
    t.push_back({cplx(1.0 / count, 0.0), xi, 0.5 * Eigen::Vector2d(xi(1), -xi(0))});
  }
  return t;
}

template <bool Omp>
void BM_shift_accumulate(benchmark::State& st) {
  const GridSpec s = grid(static_cast<int>(st.range(0)));
  const auto gc = fourier_inverse(gauss(s, 0.3));
  const auto terms = shift_terms(s, 256);
  for (auto _ : st) {
    auto out = Omp ? kernels::shift_accumulate_omp(gc, terms) : kernels::shift_accumulate_serial(gc, terms);
    benchmark::DoNotOptimize(out.values.data());
  }
}

template <bool Omp>
void BM_twisted_gather(benchmark::State& st) {
  const GridSpec s = grid(static_cast<int>(st.range(0)));
  const auto fc = fourier_inverse(gauss(s, 0.3)), gc = fourier_inverse(gauss(s, -0.4));
  const auto idx = retained_frequencies(fc, 1e-10);
  const kernels::TwistedArgs args{&s, fc.values, idx, gc.values, PoissonVectorSpace::plane(1.0).sigma(), true};
  std::vector<cplx> out(static_cast<size_t>(s.size()));
  for (auto _ : st) {
    if (Omp)
      kernels::twisted_gather_omp(args, out);
    else
      kernels::twisted_gather_serial(args, out);
    benchmark::DoNotOptimize(out.data());
  }
}

kernels::LatticeWeyl lattice_op(const GridSpec& s, int count) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> lab(-8, 8);
  std::vector<kernels::LatticeWeyl::Term> t;
  for (int k = 0; k < count; ++k) {
    const Eigen::Vector2i l(lab(rng), lab(rng));
    t.push_back({cplx(1.0, 0.0), l, Eigen::Vector2i(l(1), -l(0))});
  }
  return kernels::LatticeWeyl(s, t);
}

template <bool Omp>
void BM_lattice_weyl(benchmark::State& st) {
  const GridSpec s = grid(static_cast<int>(st.range(0)));
  const auto op = lattice_op(s, 256);
  const auto in = gauss(s, 0.0).values;
  std::vector<cplx> out(in.size());
  for (auto _ : st) {
    if (Omp)
      op.apply_omp(in, out);
    else
      op.apply_serial(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Omp>
void BM_assemble_columns(benchmark::State& st) {
  const GridSpec s = grid(static_cast<int>(st.range(0)));
  const auto op = lattice_op(s, 32);
  const kernels::ApplyFn f = [&](std::span<const cplx> in, std::span<cplx> out) { op.apply_serial(in, out); };
  for (auto _ : st) {
    auto m = Omp ? kernels::assemble_columns_omp(s.size(), f) : kernels::assemble_columns_serial(s.size(), f);
    benchmark::DoNotOptimize(m.data());
  }
}

}  // namespace

BENCHMARK(BM_shift_accumulate<false>)->Name("shift_accumulate_serial")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_shift_accumulate<true>)->Name("shift_accumulate_omp")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_twisted_gather<false>)->Name("twisted_gather_serial")->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_twisted_gather<true>)->Name("twisted_gather_omp")->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lattice_weyl<false>)->Name("lattice_weyl_serial")->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lattice_weyl<true>)->Name("lattice_weyl_omp")->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_columns<false>)->Name("assemble_columns_serial")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_columns<true>)->Name("assemble_columns_omp")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
