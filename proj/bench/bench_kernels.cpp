#include <benchmark/benchmark.h>

#include <map>

#include "rbfloi/drivers.hpp"
#include "rbfloi/geometry.hpp"
#include "rbfloi/linalg.hpp"
#include "rbfloi/rbf_assembly.hpp"

using namespace rbfloi;

namespace {

struct Fixture {
  NodeSet nodes;
  AssemblyConfig config;
  StencilSet stencils;
  SparseMatrix laplacian;
  Field x;
};

const Fixture& fixture(int level) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(level);
  if (it != cache.end()) return it->second;
  Fixture f;
  f.nodes = generate_sphere_nodes(level);
  f.config = AssemblyConfig::from_degree(4, 1e-4);
  f.stencils = build_stencils(f.nodes, f.config.stencil_size, f.config.delta);
  f.laplacian = assemble_global(f.stencils, f.nodes, f.config, Execution::serial).laplacian;
  f.x = Field::LinSpaced(f.nodes.size(), -1.0, 1.0);
  return cache.emplace(level, std::move(f)).first->second;
}

void assemble(benchmark::State& state, Execution execution) {
  const Fixture& f = fixture(int(state.range(0)));
  for (auto _ : state) {
    GlobalOperators g = assemble_global(f.stencils, f.nodes, f.config, execution);
    benchmark::DoNotOptimize(g.laplacian.valuePtr());
  }
  state.counters["N"] = double(f.nodes.size());
}

void BM_AssembleSerial(benchmark::State& state) { assemble(state, Execution::serial); }
void BM_AssembleParallel(benchmark::State& state) { assemble(state, Execution::parallel); }

template <Field (*Multiply)(const SparseMatrix&, const Field&)>
void BM_Spmv(benchmark::State& state) {
  const Fixture& f = fixture(int(state.range(0)));
  for (auto _ : state) {
    Field y = Multiply(f.laplacian, f.x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * f.laplacian.nonZeros());
}

}  // namespace

BENCHMARK(BM_AssembleSerial)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallel)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spmv<spmv_serial>)->Arg(4)->Arg(5);
BENCHMARK(BM_Spmv<spmv>)->Arg(4)->Arg(5);

BENCHMARK_MAIN();
