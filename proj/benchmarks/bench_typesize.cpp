#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "typesize/codec.hpp"
#include "typesize/quantized_types.hpp"
#include "typesize/random.hpp"
#include "typesize/rate_analysis.hpp"

using namespace typesize;

namespace {

FamilySpec ternary() {
  Eigen::MatrixXd tau(3, 2);
  tau << 0, 0, 1, 0, 0, 1;
  return FamilySpec(tau, 8.0);
}

Sequence random_sequence(SplitMix64& rng, std::size_t k, std::uint32_t n) {
  Sequence seq(n);
  for (auto& s : seq) s = static_cast<Symbol>(rng.next() % k + 1);
  return seq;
}

void BM_BuildIndex(benchmark::State& state) {
  const auto spec = ternary();
  const Grid grid = make_grid(2, static_cast<std::uint32_t>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_type_index(spec, grid));
}
BENCHMARK(BM_BuildIndex)->Arg(32)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_EncodeDecode(benchmark::State& state) {
  const auto spec = ternary();
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const TypeSizeCodec codec(std::make_shared<TypeIndex>(build_type_index(spec, make_grid(2, n, 1.0))));
  SplitMix64 rng(1);
  const Sequence seq = random_sequence(rng, 3, n);
  for (auto _ : state) benchmark::DoNotOptimize(codec.decode(codec.encode(seq)));
}
BENCHMARK(BM_EncodeDecode)->Arg(64)->Arg(256)->Arg(1024);

void BM_MEps(benchmark::State& state) {
  const auto spec = ternary();
  const auto n = static_cast<std::uint32_t>(state.range(0));
  Eigen::VectorXd theta(2);
  theta << 0.4, -0.9;
  const SourceSpec source{spec, ParamVector(spec, theta)};
  const TypeIndex index = build_type_index(spec, make_grid(2, n, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(m_eps(source, index, 0.1));
}
BENCHMARK(BM_MEps)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
