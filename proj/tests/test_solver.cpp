#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "stiga/solver.hpp"

using namespace stiga;

namespace {

TensorSpace grid_space(int mx, int mt, int p, double lt = 1.0) {
    std::vector<KnotVector> axes;
    axes.push_back(KnotVector::open_uniform(1.0, mx, p));
    axes.push_back(KnotVector::open_uniform(lt, mt, p));
    return TensorSpace(std::move(axes), true);
}

ProblemData transport_problem() {
    ProblemData prob;
    prob.d = 1;
    prob.transient = true;
    prob.mu = 0.0;
    prob.beta = [](const SpatialPoint&) { return Velocity{1.0, 0.0}; };
    auto step = [](double s) { return s < 0.0 ? 1.0 : (s > 0.0 ? 0.0 : 0.5); };
    prob.initial = [step](const SpatialPoint& x) { return step(x[0] - 0.25); };
    prob.dirichlet = [step](const SpatialPoint& x, double t) {
        return step(x[0] - 0.25 - t);
    };
    return prob;
}

}  // namespace

TEST_CASE("identity system returns the load") {
    ReducedSystem sys;
    sys.A.resize(4, 4);
    sys.A.setIdentity();
    sys.b = Eigen::Vector4d(1.0, -2.0, 0.5, 3.0);
    const Eigen::VectorXd x = solve_linear(sys);
    CHECK((x - sys.b).norm() == doctest::Approx(0.0));
}

TEST_CASE("3x3 system against a dense oracle") {
    Eigen::Matrix3d dense;
    dense << 4, -1, 0, -1, 4, -1, 0, -1, 4;  // diffusion-style tridiagonal
    const Eigen::Vector3d b(1.0, 2.0, 3.0);
    const Eigen::Vector3d expect = dense.fullPivLu().solve(b);

    ReducedSystem sys;
    sys.A = dense.sparseView();
    sys.b = b;
    const Eigen::VectorXd x = solve_linear(sys);
    CHECK((x - expect).norm() < 1e-12);
}

TEST_CASE("singular system reports a solver failure") {
    ReducedSystem sys;
    sys.A.resize(3, 3);
    std::vector<Eigen::Triplet<double>> trips{{0, 0, 1.0}, {1, 1, 1.0}};  // zero row 2
    sys.A.setFromTriplets(trips.begin(), trips.end());
    sys.b = Eigen::Vector3d(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(solve_linear(sys), SolverFailure);
}

TEST_CASE("constant data converges in one iteration") {
    ProblemData prob;
    prob.d = 1;
    prob.transient = true;
    prob.mu = 1.0;
    prob.dirichlet = [](const SpatialPoint&, double) { return 3.0; };
    prob.initial = [](const SpatialPoint&) { return 3.0; };
    const TensorSpace sp = grid_space(6, 5, 1);
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const Constraints cons = make_constraints(sp, prob);

    StabilizationParams params;
    NonlinearConfig config;
    config.tol = 1e-8;
    const SolveResult res = solve_nonlinear(sp, sys, cons, params, config);
    CHECK(res.converged);
    CHECK(res.iterations == 1);
    for (std::int64_t i = 0; i < sp.total_points(); ++i) {
        CHECK(res.u[i] == doctest::Approx(3.0).epsilon(1e-9));
    }
}

TEST_CASE("affine data keeps the stabilization off") {
    ProblemData prob;
    prob.d = 1;
    prob.transient = true;
    prob.mu = 0.4;
    prob.beta = [](const SpatialPoint&) { return Velocity{1.0, 0.0}; };
    auto exact = [](const SpatialPoint& x, double t) { return 0.5 + x[0] - 0.25 * t; };
    prob.dirichlet = exact;
    prob.initial = [exact](const SpatialPoint& x) { return exact(x, 0.0); };
    prob.source = [](const SpatialPoint&, double) { return -0.25 + 1.0; };

    const TensorSpace sp = grid_space(6, 5, 2);
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const Constraints cons = make_constraints(sp, prob);

    const Eigen::VectorXd unstab = solve_galerkin(sys, cons);

    StabilizationParams params;
    params.q = 10.0;
    NonlinearConfig config;
    config.tol = 1e-10;
    config.max_iters = 50;
    const SolveResult res = solve_nonlinear(sp, sys, cons, params, config);
    CHECK(res.converged);
    CHECK((res.u - unstab).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("fixed point residual contract on a transport solve") {
    const ProblemData prob = transport_problem();
    const TensorSpace sp = grid_space(24, 24, 1, 0.5);
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const Constraints cons = make_constraints(sp, prob);

    StabilizationParams params;
    params.regularized = true;
    NonlinearConfig config;
    config.tol = 1e-5;
    config.method = NonlinearMethod::hybrid;
    config.max_iters = 200;
    const SolveResult res = solve_nonlinear(sp, sys, cons, params, config);
    REQUIRE(res.converged);

    const Eigen::VectorXd r = stabilized_residual(sp, sys, cons, params, res.u);
    const ReducedSystem red = apply_constraints(sys.K, sys.F, cons);
    const double scale = std::max(red.b.norm(), 1e-300);
    CHECK(r.norm() / scale <= 10.0 * config.tol);
}

TEST_CASE("hybrid requires the regularized stabilization") {
    const ProblemData prob = transport_problem();
    const TensorSpace sp = grid_space(8, 8, 1, 0.5);
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const Constraints cons = make_constraints(sp, prob);
    StabilizationParams params;
    params.regularized = false;
    NonlinearConfig config;
    config.method = NonlinearMethod::hybrid;
    CHECK_THROWS_AS(solve_nonlinear(sp, sys, cons, params, config),
                    std::invalid_argument);
}

TEST_CASE("finite-difference jacobian matches directional differences") {
    const ProblemData prob = transport_problem();
    const TensorSpace sp = grid_space(10, 10, 1, 0.5);
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const Constraints cons = make_constraints(sp, prob);

    StabilizationParams params;
    params.regularized = true;

    std::mt19937 rng(51);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    Eigen::VectorXd u(sp.total_points());
    for (std::int64_t i = 0; i < u.size(); ++i) {
        const Point x = sp.greville_point(sp.unflatten(i));
        u[i] = 0.5 + 0.3 * std::sin(7.0 * x[0] + 3.0 * x[1]) + 0.05 * unif(rng);
    }
    u = cons.merge(cons.restrict_free(u));  // constrained slots at data values

    const Eigen::SparseMatrix<double> J = residual_jacobian(sp, sys, cons, params, u);
    const Eigen::VectorXd r0 = stabilized_residual(sp, sys, cons, params, u);

    const double delta = 1e-6;
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd v_free(cons.n_free());
        for (std::int64_t f = 0; f < cons.n_free(); ++f) v_free[f] = unif(rng);
        v_free.normalize();
        Eigen::VectorXd u_pert = u;
        for (std::int64_t f = 0; f < cons.n_free(); ++f) {
            u_pert[cons.free_list[f]] += delta * v_free[f];
        }
        const Eigen::VectorXd r1 = stabilized_residual(sp, sys, cons, params, u_pert);
        const Eigen::VectorXd fd = (r1 - r0) / delta;
        const Eigen::VectorXd jv = J * v_free;
        CHECK((jv - fd).norm() / fd.norm() < 1e-4);
    }
}

TEST_CASE("deterministic iteration counts") {
    const ProblemData prob = transport_problem();
    const TensorSpace sp = grid_space(16, 16, 1, 0.5);
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const Constraints cons = make_constraints(sp, prob);
    StabilizationParams params;
    params.regularized = true;
    NonlinearConfig config;
    config.tol = 1e-6;
    config.method = NonlinearMethod::hybrid;
    const SolveResult a = solve_nonlinear(sp, sys, cons, params, config);
    const SolveResult b = solve_nonlinear(sp, sys, cons, params, config);
    CHECK(a.converged);
    CHECK(a.iterations == b.iterations);
    CHECK((a.u - b.u).norm() == 0.0);
}

TEST_CASE("regularization speeds up Picard on the coarse front") {
    // 25x25 control points, q = 1, sigma = 0.1, eps = 0.01.
    const ProblemData prob = transport_problem();
    const TensorSpace sp = grid_space(24, 24, 1, 0.5);
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const Constraints cons = make_constraints(sp, prob);

    NonlinearConfig config;
    config.tol = 1e-5;
    config.max_iters = 1000;
    config.method = NonlinearMethod::picard;

    StabilizationParams reg;
    reg.q = 1.0;
    reg.regularized = true;
    reg.sigma = 1e-1;
    reg.epsilon = 1e-2;
    const SolveResult res_reg = solve_nonlinear(sp, sys, cons, reg, config);

    StabilizationParams nonreg;
    nonreg.q = 1.0;
    nonreg.regularized = false;
    const SolveResult res_plain = solve_nonlinear(sp, sys, cons, nonreg, config);

    CHECK(res_reg.converged);
    CHECK(res_plain.converged);
    CHECK(res_reg.iterations <= res_plain.iterations);
}

TEST_CASE("history carries per-iteration records") {
    const ProblemData prob = transport_problem();
    const TensorSpace sp = grid_space(12, 12, 1, 0.5);
    const SystemMatrix sys = assemble_galerkin(sp, prob);
    const Constraints cons = make_constraints(sp, prob);
    StabilizationParams params;
    params.regularized = true;
    NonlinearConfig config;
    config.tol = 1e-5;
    config.method = NonlinearMethod::hybrid;
    const SolveResult res = solve_nonlinear(sp, sys, cons, params, config);
    REQUIRE(res.converged);
    CHECK(res.history.size() == static_cast<std::size_t>(res.iterations));
    bool saw_newton = false;
    for (const auto& rec : res.history) {
        CHECK((rec.phase == 'P' || rec.phase == 'N'));
        if (rec.phase == 'N') saw_newton = true;
    }
    CHECK(saw_newton);  // hybrid must actually reach the Newton phase here
}
