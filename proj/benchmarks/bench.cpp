#include "gadgetforge/lower.hpp"
#include "gadgetforge/reach.hpp"
#include "gadgetforge/verify.hpp"

#include <benchmark/benchmark.h>

using namespace gadgetforge;

namespace {

// Moves c0 into c1 one unit at a time.
machine::Program transfer() {
  return machine::parse_program(
      "counters: c0 c1 z\n"
      "0: JZ c0 4\n"
      "1: DEC c0\n"
      "2: INC c1\n"
      "3: JZ z 0\n"
      "4: HALT\n");
}

void BM_MachineRun(benchmark::State& state) {
  const auto p = transfer();
  const std::vector<machine::Natural> init{machine::Natural(state.range(0)), 0, 0};
  for (auto _ : state) benchmark::DoNotOptimize(machine::run(p, init, 1'000'000'000));
}
BENCHMARK(BM_MachineRun)->Arg(1000)->Arg(100000);

void BM_BfsReachCompiled(benchmark::State& state) {
  const auto art = lower::compile_machine_to_incdecjz(transfer(), {machine::Natural(state.range(0)), 0, 0});
  const gadgets::Model model(art.system);
  for (auto _ : state) benchmark::DoNotOptimize(reach::bfs_reach(model, state.range(0) + 2, 10'000'000));
}
BENCHMARK(BM_BfsReachCompiled)->Arg(2)->Arg(6)->Arg(12);

void BM_BfsReachPipeline(benchmark::State& state) {
  const auto target = static_cast<lower::Target>(state.range(0));
  const auto art = lower::pipeline(transfer(), {2, 0, 0}, target);
  const gadgets::Model model(art.system);
  for (auto _ : state) benchmark::DoNotOptimize(reach::bfs_reach(model, 8, 10'000'000));
}
BENCHMARK(BM_BfsReachPipeline)->DenseRange(0, 2);

void BM_Pipeline(benchmark::State& state) {
  const auto p = transfer();
  const auto target = static_cast<lower::Target>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lower::pipeline(p, {3, 0, 0}, target, {1, 2, 1, 2}));
}
BENCHMARK(BM_Pipeline)->DenseRange(0, 3);

void BM_DeriveBoundaryLts(benchmark::State& state) {
  const auto sub = verify::subsystem_of(lower::sim_incdecjz_via_incjzdec());
  for (auto _ : state) benchmark::DoNotOptimize(verify::derive_boundary_lts(sub, state.range(0)));
}
BENCHMARK(BM_DeriveBoundaryLts)->Arg(4)->Arg(8)->Arg(16);

void BM_VerifyConstruction(benchmark::State& state) {
  const LoweringArtifact arts[] = {lower::build_inc_decnz_decnz(), lower::sim_incdecjz_via_incjzdec(),
                                   lower::sim_incjzdec_via_incdecnzpz(), lower::build_sscd_from_incdecnz(),
                                   lower::sim_incdecnzpz_via_incab({1, 2, 1, 2})};
  const auto& art = arts[state.range(0)];
  for (auto _ : state) benchmark::DoNotOptimize(verify::verify_artifact(art, 6));
}
BENCHMARK(BM_VerifyConstruction)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

void BM_EdgeDuplicatorHarness(benchmark::State& state) {
  const auto art = lower::edge_duplicator_harness({1, 2, 1, 2});
  for (auto _ : state) benchmark::DoNotOptimize(verify::verify_artifact(art, 4));
}
BENCHMARK(BM_EdgeDuplicatorHarness)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
