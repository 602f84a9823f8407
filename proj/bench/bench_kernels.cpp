// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "deltaloop/bracketing.hpp"
#include "deltaloop/comparison.hpp"
#include "deltaloop/lattice.hpp"

using namespace deltaloop;

namespace {

const lattice::MagneticStencil& stencil(double h) {
  static std::vector<std::pair<double, lattice::MagneticStencil>> cache;
  for (const auto& [k, s] : cache)
    if (k == h) return s;
  const auto c = geometry::ellipse(1.4, 0.8, 512);
  const auto g = lattice::Grid2D::around(c, 20.0, h);
  cache.emplace_back(h, lattice::make_stencil(g, 1.0, lattice::deposit(c, g, 20.0, lattice::Deposition::LinkCorrected), 20.0));
  return cache.back().second;
}

template <void (*Apply)(const lattice::MagneticStencil&, const lattice::cd*, lattice::cd*)>
void BM_apply(benchmark::State& state) {
  const auto& st = stencil(1.0 / static_cast<double>(state.range(0)));
  std::vector<lattice::cd> in(static_cast<std::size_t>(st.grid.size()), {1.0, 0.5}), out(in.size());
  for (auto _ : state) {
    Apply(st, in.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * st.grid.size());
}

template <lattice::SparseMatrix (*Assemble)(const lattice::MagneticStencil&)>
void BM_assemble(benchmark::State& state) {
  const auto& st = stencil(1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Assemble(st));
  state.SetItemsProcessed(state.iterations() * st.grid.size());
}

const std::vector<bracketing::StripSample>& samples() {
  static const auto s = bracketing::strip_samples(geometry::wiggly(1024), 2048);
  return s;
}

void BM_grid_maxima_serial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bracketing::serial::grid_maxima(samples(), 1.0, 0.05, 257));
}
void BM_grid_maxima_omp(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bracketing::omp::grid_maxima(samples(), 1.0, 0.05, 257));
}

std::vector<double> field_grid() {
  std::vector<double> B;
  for (int i = 0; i < 16; ++i) B.push_back(0.05 * i);
  return B;
}

void BM_sweep_serial(benchmark::State& state) {
  const auto c = geometry::ellipse(2.0, 1.0, 512);
  const auto B = field_grid();
  for (auto _ : state) benchmark::DoNotOptimize(comparison::serial::sweep(c, B, 64, 3));
}
void BM_sweep_omp(benchmark::State& state) {
  const auto c = geometry::ellipse(2.0, 1.0, 512);
  const auto B = field_grid();
  for (auto _ : state) benchmark::DoNotOptimize(comparison::omp::sweep(c, B, 64, 3));
}

}  // namespace

BENCHMARK(BM_apply<lattice::serial::apply>)->Name("apply/serial")->Arg(50)->Arg(200);
BENCHMARK(BM_apply<lattice::omp::apply>)->Name("apply/omp")->Arg(50)->Arg(200);
BENCHMARK(BM_assemble<lattice::serial::assemble>)->Name("assemble/serial")->Arg(50)->Arg(200);
BENCHMARK(BM_assemble<lattice::omp::assemble>)->Name("assemble/omp")->Arg(50)->Arg(200);
BENCHMARK(BM_grid_maxima_serial)->Name("grid_maxima/serial");
BENCHMARK(BM_grid_maxima_omp)->Name("grid_maxima/omp");
BENCHMARK(BM_sweep_serial)->Name("sweep/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_omp)->Name("sweep/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
