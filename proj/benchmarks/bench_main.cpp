#include "fdlpv/etfe.hpp"
#include "fdlpv/obf.hpp"
#include "fdlpv/synthesis.hpp"
#include "fdlpv/workflow.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <random>

using namespace fdlpv;

namespace {

const SynthesisProblem& problem(size_t n) {
    static std::map<size_t, SynthesisProblem> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        SurrogateProblemOptions opt;
        opt.frequencies = n;
        it = cache.emplace(n, surrogate_problem(LpvSurrogateModel::surrogate_v1(), opt)).first;
    }
    return it->second;
}

void eval_laguerre(benchmark::State& state) {
    const auto grid = default_grid(static_cast<size_t>(state.range(0)), 200.0);
    const ObfBasis b = ObfBasis::laguerre(0.7, 8);
    for (auto _ : state)
        benchmark::DoNotOptimize(eval_basis(b, grid));
}
BENCHMARK(eval_laguerre)->Arg(512)->Arg(4096);

void assemble(benchmark::State& state) {
    const SynthesisProblem& pr = problem(static_cast<size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(assemble_constraints(pr, 2.0));
}
BENCHMARK(assemble)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void feasibility(benchmark::State& state) {
    const SynthesisProblem& pr = problem(static_cast<size_t>(state.range(0)));
    const ConstraintSet cs = assemble_constraints(pr, 2.0);
    const EqualityConstraints eq = build_equalities(pr);
    for (auto _ : state)
        benchmark::DoNotOptimize(feasibility_solve(cs, eq, pr.options.theta_bound));
}
BENCHMARK(feasibility)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void bisection(benchmark::State& state) {
    const SynthesisProblem& pr = problem(512);
    for (auto _ : state)
        benchmark::DoNotOptimize(bisect_gamma(pr));
}
BENCHMARK(bisection)->Unit(benchmark::kMillisecond)->Iterations(3);

void etfe(benchmark::State& state) {
    const size_t n = static_cast<size_t>(state.range(0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> u(n), y(n);
    for (auto& v : u)
        v = g(rng);
    const RationalTf h = RationalTf::from_descending(std::vector<double>{0.3, 0.1}, std::vector<double>{1.0, -0.5, 0.06});
    y = h.filter(u);
    const TimeRecord in(u, 200.0), out(y, 200.0);
    const auto grid = default_grid(512, 200.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(etfe_estimate(in, out, grid, Window::Hann, 4));
}
BENCHMARK(etfe)->Arg(1 << 16)->Arg(240000)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
