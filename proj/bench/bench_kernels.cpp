// Serial reference vs OpenMP kernels on the bundled fixtures.

#include "cfgs/engine.hpp"
#include "cfgs/oracle/oracle.hpp"
#include "cfgs/oracle/sweep.hpp"
#include "cfgs/service/document.hpp"

#include <benchmark/benchmark.h>

using namespace cfgs;

namespace {

ProblemSpec fixture(const std::string& id) {
    return service::load_spec_file(std::string(CFGS_FIXTURES) + "/" + id + ".spec").spec;
}

// Spec and grid with a few thousand points.
struct Grid {
    ProblemSpec spec = fixture("married");
    oracle::GroundGrid grid = oracle::GroundGrid::exact(spec);
    Instance original = oracle::undesired_set(spec, grid).front();
};

const Grid& married() {
    static const Grid g;
    return g;
}

struct Sweep {
    Engine engine{fixture("adult_foldse")};
    std::vector<asp::Atom> atoms = oracle::ground_atoms(engine.spec(), engine.compiled(), 2'000);
};

const Sweep& adult() {
    static const Sweep s;
    return s;
}

void BM_undesired_serial(benchmark::State& st) {
    const auto& g = married();
    for (auto _ : st) benchmark::DoNotOptimize(oracle::undesired_set_serial(g.spec, g.grid));
}

void BM_undesired_parallel(benchmark::State& st) {
    const auto& g = married();
    for (auto _ : st) benchmark::DoNotOptimize(oracle::undesired_set(g.spec, g.grid));
}

void BM_brute_pairs_serial(benchmark::State& st) {
    const auto& g = married();
    const auto r = RestrictionVector::defaults(g.spec);
    for (auto _ : st) benchmark::DoNotOptimize(oracle::brute_pairs_serial(g.spec, g.original, r, {}, g.grid));
}

void BM_brute_pairs_parallel(benchmark::State& st) {
    const auto& g = married();
    const auto r = RestrictionVector::defaults(g.spec);
    for (auto _ : st) benchmark::DoNotOptimize(oracle::brute_pairs(g.spec, g.original, r, {}, g.grid));
}

void BM_dual_sweep_serial(benchmark::State& st) {
    const auto& s = adult();
    for (auto _ : st) benchmark::DoNotOptimize(oracle::dual_violations_serial(s.engine.solver(), s.atoms));
}

void BM_dual_sweep_parallel(benchmark::State& st) {
    const auto& s = adult();
    for (auto _ : st) benchmark::DoNotOptimize(oracle::dual_violations(s.engine.solver(), s.atoms));
}

}  // namespace

BENCHMARK(BM_undesired_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_undesired_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_brute_pairs_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_brute_pairs_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dual_sweep_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dual_sweep_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
