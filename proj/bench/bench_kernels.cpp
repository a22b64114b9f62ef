#include <random>

#include <benchmark/benchmark.h>

#include "txflow/kernels.hpp"

using namespace txflow::kernels;

namespace {

struct Problem {
    Eigen::MatrixXd X, S, D;
};

// Poisson counts with the given share of zero cells.
Problem make_problem(Eigen::Index n, Eigen::Index k, double zero_share) {
    std::mt19937_64 rng(42);
    std::bernoulli_distribution zero(zero_share);
    std::poisson_distribution<int> count(3.0);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Problem p;
    p.X = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < p.X.size(); ++i)
        if (!zero(rng)) p.X.data()[i] = 1 + count(rng);
    p.S.resize(n, k);
    p.D.resize(k, n);
    for (auto& v : p.S.reshaped()) v = u(rng);
    for (auto& v : p.D.reshaped()) v = u(rng);
    return p;
}

double zero_share(const benchmark::State& state) { return static_cast<double>(state.range(1)) / 100.0; }

void BM_UpdateSourcesSparse(benchmark::State& state) {
    const auto p = make_problem(state.range(0), 13, zero_share(state));
    const SparseCounts X(p.X);
    for (auto _ : state) {
        RowMatrix S = p.S;
        kl_update_sources(X, S, p.D, 1e-12);
        benchmark::DoNotOptimize(S.data());
    }
}

void BM_UpdateSourcesDense(benchmark::State& state) {
    const auto p = make_problem(state.range(0), 13, zero_share(state));
    for (auto _ : state) {
        Eigen::MatrixXd S = p.S;
        kl_update_sources_dense(p.X, S, p.D, 1e-12);
        benchmark::DoNotOptimize(S.data());
    }
}

void BM_UpdateSourcesRef(benchmark::State& state) {
    const auto p = make_problem(state.range(0), 13, zero_share(state));
    for (auto _ : state) {
        Eigen::MatrixXd S = p.S;
        kl_update_sources_ref(p.X, S, p.D, 1e-12);
        benchmark::DoNotOptimize(S.data());
    }
}

void BM_UpdateDestinationsSparse(benchmark::State& state) {
    const auto p = make_problem(state.range(0), 13, zero_share(state));
    const SparseCounts X(p.X);
    const RowMatrix S = p.S;
    for (auto _ : state) {
        Eigen::MatrixXd D = p.D;
        kl_update_destinations(X, S, D, 1e-12);
        benchmark::DoNotOptimize(D.data());
    }
}

void BM_UpdateDestinationsDense(benchmark::State& state) {
    const auto p = make_problem(state.range(0), 13, zero_share(state));
    for (auto _ : state) {
        Eigen::MatrixXd D = p.D;
        kl_update_destinations_dense(p.X, p.S, D, 1e-12);
        benchmark::DoNotOptimize(D.data());
    }
}

void BM_UpdateDestinationsRef(benchmark::State& state) {
    const auto p = make_problem(state.range(0), 13, zero_share(state));
    for (auto _ : state) {
        Eigen::MatrixXd D = p.D;
        kl_update_destinations_ref(p.X, p.S, D, 1e-12);
        benchmark::DoNotOptimize(D.data());
    }
}

void BM_DivergenceSparse(benchmark::State& state) {
    const auto p = make_problem(state.range(0), 13, zero_share(state));
    const SparseCounts X(p.X);
    const RowMatrix S = p.S;
    for (auto _ : state) benchmark::DoNotOptimize(kl_divergence(X, S, p.D));
}

void BM_DivergenceRef(benchmark::State& state) {
    const auto p = make_problem(state.range(0), 13, zero_share(state));
    for (auto _ : state) benchmark::DoNotOptimize(kl_divergence_ref(p.X, p.S, p.D));
}

LaplacianCsr ring_with_chords(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(n - 1));
    std::vector<WeightedPair> pairs;
    for (std::uint32_t i = 0; i + 1 < n; ++i) pairs.push_back({i, i + 1, 1.0});
    for (std::size_t c = 0; c < 30 * n; ++c) {
        auto a = node(rng), b = node(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        pairs.push_back({a, b, 2.0});
    }
    std::sort(pairs.begin(), pairs.end(), [](auto& l, auto& r) { return std::tie(l.i, l.j) < std::tie(r.i, r.j); });
    pairs.erase(std::unique(pairs.begin(), pairs.end(), [](auto& l, auto& r) { return l.i == r.i && l.j == r.j; }),
                pairs.end());
    return build_laplacian(n, pairs);
}

void BM_LaplacianApply(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto L = ring_with_chords(n);
    std::vector<double> x(n, 1.0), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i % 17);
    for (auto _ : state) {
        laplacian_apply(L, x, y);
        benchmark::DoNotOptimize(y.data());
    }
}

void BM_LaplacianApplyRef(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto L = ring_with_chords(n);
    std::vector<double> x(n, 1.0), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i % 17);
    for (auto _ : state) {
        laplacian_apply_ref(L, x, y);
        benchmark::DoNotOptimize(y.data());
    }
}

// {matrix size, percent of zero cells}
void nmf_args(benchmark::internal::Benchmark* b) {
    for (int n : {100, 500})
        for (int z : {0, 50, 93}) b->Args({n, z});
}

}  // namespace

BENCHMARK(BM_UpdateSourcesSparse)->Apply(nmf_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UpdateSourcesDense)->Apply(nmf_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UpdateSourcesRef)->Apply(nmf_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UpdateDestinationsSparse)->Apply(nmf_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UpdateDestinationsDense)->Apply(nmf_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UpdateDestinationsRef)->Apply(nmf_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DivergenceSparse)->Apply(nmf_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DivergenceRef)->Apply(nmf_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LaplacianApply)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LaplacianApplyRef)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
