#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "beamlab/beam_solver.hpp"
#include "beamlab/kernels.hpp"

using namespace beamlab;

namespace {

std::vector<double> field(std::size_t n, double amp) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -30.0 + 60.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        v[i] = amp * std::exp(-x * x / 8);
    }
    v.front() = v.back() = 0.0;
    return v;
}

Exec mode(const benchmark::State& st) { return st.range(1) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& st) { st.SetLabel(st.range(1) ? "parallel" : "serial"); }

void BM_SpatialOperator(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto u = field(n, 1.0);
    std::vector<double> a(n), b(n);
    for (auto _ : st) {
        kernels::spatial_operator(u, 0.1, a, b, mode(st));
        benchmark::DoNotOptimize(b.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
    label(st);
}

void BM_NonlinearIncrement(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto B = field(n, 0.5), w = field(n, 1e-3);
    std::vector<double> out(n);
    for (auto _ : st) {
        kernels::nonlinear_increment(B, w, 2.5, out, mode(st));
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
    label(st);
}

void BM_Derivatives(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto u = field(n, 1.0);
    std::vector<double> d1(n), d2(n), d3(n), d4(n);
    for (auto _ : st) {
        kernels::derivatives(u, 0.1, d1, d2, d3, d4, mode(st));
        benchmark::DoNotOptimize(d4.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
    label(st);
}

void BM_WeightedDot(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto a = field(n, 1.0), b = field(n, 2.0), w = field(n, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::weighted_dot(a, b, w, mode(st)));
    st.SetItemsProcessed(st.iterations() * st.range(0));
    label(st);
}

// 100 solver steps of the perturbed canonical problem.
void BM_SolverSteps(benchmark::State& st) {
    static const auto prof = std::make_shared<const ProfileSolution>(
        extend_profile(solve_profile(2.5, 2.0 / 3.0, 1.0, ProfileTarget::from_c0(1.0)), 200.0));
    const ModelParams m{0, 0, 1, 2.5};
    auto gamma = std::make_shared<const GammaField>(m, prof);
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto g = SpatialGrid::symmetric(0.1 * static_cast<double>(n - 1) / 2, n);
    const auto init = initialize(*gamma, 10.0, g, {1e-3, 1.0, 0.0, PerturbTarget::u});
    SolverOptions o;
    o.dt = 0.025;
    o.exec = mode(st);
    BeamSolver s(m, gamma, o);
    for (auto _ : st) {
        auto r = s.evolve(init, 10.0 + 100 * o.dt, {}, {}, false);
        benchmark::DoNotOptimize(r.final_state.u.data());
    }
    label(st);
}

void sizes(benchmark::internal::Benchmark* b) {
    for (long n : {4097L, 65537L, 1048577L}) {
        b->Args({n, 0});
        b->Args({n, 1});
    }
}

}  // namespace

BENCHMARK(BM_SpatialOperator)->Apply(sizes);
BENCHMARK(BM_NonlinearIncrement)->Apply(sizes);
BENCHMARK(BM_Derivatives)->Apply(sizes);
BENCHMARK(BM_WeightedDot)->Apply(sizes);
BENCHMARK(BM_SolverSteps)->Args({1201, 0})->Args({1201, 1})->Args({5883, 0})->Args({5883, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
