#include <benchmark/benchmark.h>

#include <random>

#include "stiga/assembly.hpp"
#include "stiga/cases.hpp"
#include "stiga/solver.hpp"
#include "stiga/stabilization.hpp"

using namespace stiga;

namespace {

TensorSpace bench_space(int spans, int p) {
    std::vector<KnotVector> axes;
    axes.push_back(KnotVector::open_uniform(1.0, spans, p));
    axes.push_back(KnotVector::open_uniform(1.0, spans, p));
    return TensorSpace(std::move(axes), true);
}

ProblemData bench_problem() {
    ProblemData prob;
    prob.d = 1;
    prob.transient = true;
    prob.mu = 1e-3;
    prob.beta = [](const SpatialPoint&) { return Velocity{1.0, 0.0}; };
    return prob;
}

void bm_basis_eval(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const KnotVector kv = KnotVector::open_uniform(1.0, 64, p);
    std::vector<double> ders(2 * (p + 1));
    double x = 0.0;
    for (auto _ : state) {
        x += 0.000137;
        if (x > 1.0) x -= 1.0;
        benchmark::DoNotOptimize(kv.eval_span_derivatives(x, 1, ders.data()));
        benchmark::DoNotOptimize(ders.data());
    }
}
BENCHMARK(bm_basis_eval)->Arg(1)->Arg(2)->Arg(3)->Arg(4);

void bm_assemble(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const TensorSpace sp = bench_space(48, p);
    const ProblemData prob = bench_problem();
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_galerkin(sp, prob));
    }
    state.SetItemsProcessed(state.iterations() * sp.total_points());
}
BENCHMARK(bm_assemble)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void bm_detector_field(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const TensorSpace sp = bench_space(48, p);
    const DetectorGeometry geom(sp);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd u(sp.total_points());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = unif(rng);
    StabilizationParams params;
    params.regularized = true;
    const auto scaled = params.scaled(sp, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(detector_field(geom, u, scaled));
    }
    state.SetItemsProcessed(state.iterations() * sp.total_points());
}
BENCHMARK(bm_detector_field)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void bm_stabilization_matrix(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const TensorSpace sp = bench_space(48, p);
    const ProblemData prob = bench_problem();
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const DetectorGeometry geom(sp);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd u(sp.total_points());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = unif(rng);
    StabilizationParams params;
    const auto scaled = params.scaled(sp, sys.beta_max);
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_stabilization(geom, sys.K, u, scaled));
    }
    state.SetItemsProcessed(state.iterations() * sp.total_points());
}
BENCHMARK(bm_stabilization_matrix)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void bm_sparse_solve(benchmark::State& state) {
    const TensorSpace sp = bench_space(static_cast<int>(state.range(0)), 1);
    const ProblemData prob = bench_problem();
    auto cprob = prob;
    cprob.mu = 1e-2;
    cprob.dirichlet = [](const SpatialPoint&, double) { return 0.0; };
    const SystemMatrix sys = assemble_galerkin(sp, cprob);
    const Constraints cons = make_constraints(sp, cprob);
    const ReducedSystem red = apply_constraints(sys.K, sys.F, cons);
    for (auto _ : state) {
        LinearSolver solver;
        benchmark::DoNotOptimize(solver.solve(red.A, red.b));
    }
    state.SetItemsProcessed(state.iterations() * cons.n_free());
}
BENCHMARK(bm_sparse_solve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
