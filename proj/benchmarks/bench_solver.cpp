#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qcompat/compat.hpp"
#include "qcompat/maxent.hpp"
#include "qcompat/scenarios.hpp"

using namespace qcompat;

namespace {

StateSet random_full_rank_set(Index d, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<DensityMatrix> states;
  for (std::size_t i = 0; i < k; ++i) {
    Matrix g(d, d);
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < d; ++c) g(r, c) = Complex(gauss(rng), gauss(rng));
    }
    Matrix rho = g * g.adjoint();
    states.emplace_back(hermitian_part(rho / rho.trace().real()));
  }
  return StateSet(std::move(states));
}

template <CompatibilityReport (*Measure)(const StateSet&, double)>
void measure(benchmark::State& state) {
  const StateSet s = random_full_rank_set(state.range(0), static_cast<std::size_t>(state.range(1)), 17);
  for (auto _ : state) benchmark::DoNotOptimize(Measure(s, kDefaultSdpTol).value);
}

CompatibilityReport bfm_default(const StateSet& s, double tol) { return k_bfm(s, tol); }
CompatibilityReport es_default(const StateSet& s, double tol) { return k_es(s, tol); }

void fig1_sample(benchmark::State& state) {
  scenarios::SphereSampler sampler(42);
  for (auto _ : state) benchmark::DoNotOptimize(scenarios::fig1_point(1.0, sampler.next()).k_value);
}

void maxent_qubit(benchmark::State& state) {
  const std::vector<ExpectationConstraint> cs{{HermitianOperator(pauli::X()), 0.3},
                                              {HermitianOperator(pauli::Z()), -0.2}};
  for (auto _ : state) benchmark::DoNotOptimize(maxent_estimate(cs, 2).entropy);
}

}  // namespace

BENCHMARK(measure<bfm_default>)->ArgsProduct({{2, 3, 4}, {2, 4}})->Unit(benchmark::kMicrosecond);
BENCHMARK(measure<k_pp>)->ArgsProduct({{2, 3, 4}, {2, 4}})->Unit(benchmark::kMicrosecond);
BENCHMARK(measure<es_default>)->ArgsProduct({{2, 3, 4}, {2, 4}})->Unit(benchmark::kMicrosecond);
BENCHMARK(fig1_sample)->Unit(benchmark::kMicrosecond);
BENCHMARK(maxent_qubit)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
