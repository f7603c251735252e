#include <benchmark/benchmark.h>

#include <vector>

#include "lagcut/driver.hpp"
#include "lagcut/dualdecomp.hpp"
#include "lagcut/instances.hpp"
#include "lagcut/lagrangian.hpp"

using namespace lagcut;

namespace {

SipInstance sslp(int seed) {
  SslpParams p;
  p.seed = static_cast<std::uint64_t>(seed);
  p.k = seed + 1;
  return gen_sslp(p);
}

SipInstance tiny(int seed) {
  TinyParams p;
  p.seed = static_cast<std::uint64_t>(seed);
  p.n = 6;
  p.n_scenarios = 4;
  p.ny = 5;
  return gen_tiny(p);
}

void BM_ExtensiveLp(benchmark::State& state) {
  const auto ef = build_extensive_form(sslp(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(ef.program.lp).objective);
  state.counters["rows"] = ef.program.lp.num_rows();
}
BENCHMARK(BM_ExtensiveLp)->Unit(benchmark::kMillisecond);

void BM_ExtensiveMip(benchmark::State& state) {
  const auto ef = build_extensive_form(sslp(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_mip(ef.program).objective);
}
BENCHMARK(BM_ExtensiveMip)->Unit(benchmark::kMillisecond);

void BM_EvalQbar(benchmark::State& state) {
  const auto inst = sslp(0);
  const std::vector<double> pi(inst.n, -1.0);
  for (auto _ : state) benchmark::DoNotOptimize(eval_qbar(inst, 0, pi, 1.0).value);
}
BENCHMARK(BM_EvalQbar)->Unit(benchmark::kMicrosecond);

void BM_BendersCut(benchmark::State& state) {
  const auto inst = sslp(0);
  const std::vector<double> x(inst.n, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(benders_cut_at(inst, 0, x).cut.rhs);
}
BENCHMARK(BM_BendersCut)->Unit(benchmark::kMicrosecond);

void BM_ExactSeparation(benchmark::State& state) {
  const auto inst = tiny(2);
  const std::vector<double> x(inst.n, 0.5);
  const NormalizationSpec spec{};
  for (auto _ : state) {
    auto pool = init_epigraph_pool(inst, 0);
    SeparationOptions opt;
    opt.delta = static_cast<double>(state.range(0)) / 10.0;
    benchmark::DoNotOptimize(separate_restricted(inst, 0, x, -10.0, spec, pool, opt));
  }
}
BENCHMARK(BM_ExactSeparation)->Arg(0)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_RootLoop(benchmark::State& state) {
  const auto inst = sslp(1);
  VariantConfig cfg;
  cfg.variant = static_cast<Variant>(state.range(0));
  state.SetLabel(to_string(cfg.variant));
  for (auto _ : state) benchmark::DoNotOptimize(run_root_loop(inst, cfg).trace.final_bound());
}
BENCHMARK(BM_RootLoop)
    ->DenseRange(0, static_cast<int>(Variant::BendersOnly))
    ->Unit(benchmark::kMillisecond);

void BM_BranchAndCut(benchmark::State& state) {
  const auto inst = sslp(2);
  VariantConfig cfg;
  cfg.variant = state.range(0) ? Variant::RstrMIP : Variant::BendersOnly;
  state.SetLabel(state.range(0) ? "lbc" : "bbc");
  for (auto _ : state) {
    auto root = run_root_loop(inst, cfg);
    benchmark::DoNotOptimize(run_branch_and_cut(inst, std::move(root.master)).objective);
  }
}
BENCHMARK(BM_BranchAndCut)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MaximizeDual(benchmark::State& state) {
  const auto inst = tiny(5);
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(maximize_dual(inst, 1e-7, 500, workers).lower);
}
BENCHMARK(BM_MaximizeDual)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
