#include <benchmark/benchmark.h>

#include <random>

#include "evspace/financial.hpp"
#include "evspace/method_registry.hpp"
#include "evspace/sensitivity.hpp"

namespace {

using namespace evspace;

std::vector<double> flow_of(std::size_t periods) {
  std::mt19937_64 rng(periods);
  std::vector<double> flow{-1000.0};
  for (std::size_t i = 1; i < periods; ++i) {
    flow.push_back(std::uniform_real_distribution<double>(50.0, 400.0)(rng));
  }
  return flow;
}

constexpr const char* kSource = "poly(x, 1, -2.5, 3, 0.5) / (abs(y) + 1) + sqrt(cubic(z)) - x%";

void BM_Compile(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(compile(kSource));
}
BENCHMARK(BM_Compile);

void BM_EvalSuffix(benchmark::State& state) {
  const SuffixExpression expr = compile(kSource);
  const Environment env{{"x", 1.5}, {"y", -2.0}, {"z", 3.0}};
  for (auto _ : state) benchmark::DoNotOptimize(eval_suffix(expr, env));
}
BENCHMARK(BM_EvalSuffix);

void BM_Npv(benchmark::State& state) {
  const auto flow = flow_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(npv(flow, 0.08));
}
BENCHMARK(BM_Npv)->Arg(10)->Arg(50)->Arg(200);

void BM_Irr(benchmark::State& state) {
  const auto flow = flow_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(irr(flow));
}
BENCHMARK(BM_Irr)->Arg(10)->Arg(50)->Arg(200);

void BM_InvokeUserMethod(benchmark::State& state) {
  MethodRegistry registry;
  registry.define_method("m", {{"x", ParamKind::Number}, {"y", ParamKind::Number}, {"z", ParamKind::Number}},
                         kSource, "");
  const Bindings b{{"x", 1.5}, {"y", -2.0}, {"z", 3.0}};
  for (auto _ : state) benchmark::DoNotOptimize(registry.invoke("m", b));
}
BENCHMARK(BM_InvokeUserMethod);

void BM_SweepField(benchmark::State& state) {
  CashFlowTable table("bench", 30);
  table.add_field("ncf", flow_of(30));
  MethodRegistry registry;
  const SweepSpec spec{"IRR", {{"ncf", FieldRef{&table, "ncf"}}}, "ncf",
                       parse_delta_range("-0.3:0.3:" + std::to_string(state.range(0)))};
  for (auto _ : state) benchmark::DoNotOptimize(sweep(registry, spec));
}
BENCHMARK(BM_SweepField)->Arg(11)->Arg(101);

}  // namespace
BENCHMARK_MAIN();
