#include <benchmark/benchmark.h>

#include "basket/config.hpp"
#include "basket/inference.hpp"
#include "basket/simulator.hpp"

using namespace basket;

namespace {

const TrialSpec& trial() {
    static const TrialSpec spec = load_preset("paper-4arm").trial;
    return spec;
}

DesignSpec obhm(int burn, int kept) {
    auto d = load_preset("paper-4arm").designs[2].spec;
    d.mcmc.burn_in = burn;
    d.mcmc.kept_draws = kept;
    return d;
}

void BM_BetaTail(benchmark::State& state) {
    double t = 0.05;
    for (auto _ : state) {
        benchmark::DoNotOptimize(beta_tail_prob({2.1, 8.1}, t, Tail::greater));
        t = t < 0.9 ? t + 1e-4 : 0.05;
    }
}
BENCHMARK(BM_BetaTail);

// One posterior chain at the default 2000 + 10000 draws.
void BM_Chain(benchmark::State& state) {
    const auto d = obhm(2000, 10000);
    const ObservedData data{{10, 10, 10, 10}, {2, 1, 0, 3}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bhm_tail_probs(data.n, data.x, std::vector<double>{0.05, 0.05, 0.05, 0.15},
                                                std::vector<double>{0.2, 0.2, 0.2, 0.3}, d.prior, d.hyper, d.mcmc));
    }
}
BENCHMARK(BM_Chain)->Unit(benchmark::kMillisecond);

// Operating characteristics of the OBHM design over state.range(0) replicates with a warm cache.
void BM_Simulate(benchmark::State& state) {
    const auto d = obhm(500, 2000);
    const ScenarioTruth truth{"2", {0.2, 0.2, 0.2, 0.3}};
    PosteriorCache cache;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            operating_characteristics(truth, trial(), d, static_cast<int>(state.range(0)), 1, {1, &cache}));
    }
}
BENCHMARK(BM_Simulate)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
