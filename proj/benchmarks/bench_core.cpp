#include <benchmark/benchmark.h>

#include <cstdint>
#include <set>
#include <vector>

#include "pflab/addcomb.hpp"
#include "pflab/bsg.hpp"
#include "pflab/field.hpp"
#include "pflab/incidence.hpp"
#include "pflab/pipeline.hpp"
#include "pflab/rng.hpp"

namespace {

using namespace pflab;

ElementSet interval(const PrimeField& f, std::uint32_t n) {
    std::vector<std::uint32_t> v(n);
    for (std::uint32_t i = 0; i < n; ++i) v[i] = i;
    return ElementSet(f, v);
}

ElementSet random_set(const PrimeField& f, std::uint64_t seed, std::size_t n) {
    SplitMix64 rng(seed);
    std::set<std::uint32_t> seen;
    while (seen.size() < n)
        seen.insert(std::uint32_t(rng.next_below(f.modulus())));
    return ElementSet(f, {seen.begin(), seen.end()});
}

void bm_spanned_lines(benchmark::State& state) {
    const PrimeField f(10007);
    const ElementSet a = interval(f, std::uint32_t(state.range(0)));
    const AffinePointSet grid = AffinePointSet::grid(a, a);
    for (auto _ : state) {
        benchmark::DoNotOptimize(spanned_lines(grid).line_count());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_spanned_lines)->RangeMultiplier(2)->Range(8, 32)->Complexity();

void bm_incidences_naive(benchmark::State& state) {
    const PrimeField f(499);
    const auto pts = all_proj_points(f);
    const auto lns = all_proj_lines(f);
    const std::size_t n = std::size_t(state.range(0));
    const ProjPointSet p(f, {pts.begin(), pts.begin() + long(n)});
    const ProjLineSet l(f, {lns.begin(), lns.begin() + long(n)});
    for (auto _ : state) {
        benchmark::DoNotOptimize(count_incidences_naive(p, l));
    }
}
BENCHMARK(bm_incidences_naive)->RangeMultiplier(4)->Range(64, 1024);

void bm_incidences_bucketed(benchmark::State& state) {
    const PrimeField f(499);
    const auto pts = all_proj_points(f);
    const auto lns = all_proj_lines(f);
    const std::size_t n = std::size_t(state.range(0));
    const ProjPointSet p(f, {pts.begin(), pts.begin() + long(n)});
    const ProjLineSet l(f, {lns.begin(), lns.begin() + long(n)});
    for (auto _ : state) {
        benchmark::DoNotOptimize(count_incidences_bucketed(p, l));
    }
}
BENCHMARK(bm_incidences_bucketed)->RangeMultiplier(4)->Range(64, 1024);

void bm_sumset(benchmark::State& state) {
    const PrimeField f(1000003);
    const ElementSet a = random_set(f, 11, std::size_t(state.range(0)));
    const ElementSet b = random_set(f, 13, std::size_t(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sumset(a, b).size());
    }
}
BENCHMARK(bm_sumset)->RangeMultiplier(4)->Range(64, 4096);

void bm_bsg_extract(benchmark::State& state) {
    const PrimeField f(257);
    const std::size_t n = std::size_t(state.range(0));
    std::vector<std::uint32_t> side(n);
    for (std::size_t i = 0; i < n; ++i) side[i] = std::uint32_t(i);
    const ElementSet x(f, side), y(f, side);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a + b >= n / 2 && a + b < n / 2 + n)
                edges.emplace_back(side[a], side[b]);
    const PairGraph g(x, y, std::move(edges));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bsg_extract(g).sumset_size);
    }
}
BENCHMARK(bm_bsg_extract)->RangeMultiplier(2)->Range(8, 64);

void bm_beck_pipeline(benchmark::State& state) {
    const PrimeField f(1009);
    const ElementSet a = interval(f, std::uint32_t(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_beck_pipeline(a, a).stages.size());
    }
}
BENCHMARK(bm_beck_pipeline)->DenseRange(8, 16, 4);

void bm_incidence_pipeline(benchmark::State& state) {
    const PrimeField f(7);
    const ProjPointSet p(f, all_proj_points(f));
    const ProjLineSet l(f, all_proj_lines(f));
    IncidenceParams params;
    params.c_erase = 3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            run_incidence_pipeline(p, l, params).stages.size());
    }
}
BENCHMARK(bm_incidence_pipeline);

}  // namespace

BENCHMARK_MAIN();
