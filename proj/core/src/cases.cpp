#include "stiga/cases.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stiga/quadrature.hpp"

namespace stiga {

namespace {

constexpr double kPi = 3.14159265358979323846;

NonlinearConfig default_nl(double tol, NonlinearMethod method, int max_iters) {
    NonlinearConfig nl;
    nl.tol = tol;
    nl.method = method;
    nl.max_iters = max_iters;
    return nl;
}

StabilizationParams stab_params(double q, double sigma, double eps, double gamma,
                                bool regularized) {
    StabilizationParams s;
    s.q = q;
    s.sigma = sigma;
    s.epsilon = eps;
    s.gamma = gamma;
    s.regularized = regularized;
    return s;
}

}  // namespace

BenchmarkCase case_transient_diffusion_1d() {
    BenchmarkCase c;
    c.name = "transient_diffusion_1d";
    c.description =
        "1D transient diffusion on (0,1)x(0,1] with manufactured solution "
        "u = (x(x-1))^2 (t(t-1))^2; unstabilized, exercises the time-slab "
        "partitioning and temporal convergence orders";
    c.problem.d = 1;
    c.problem.transient = true;
    c.problem.mu = 1.0;
    auto X = [](double x) { return (x * x - x) * (x * x - x); };
    auto Xp = [](double x) { return 2.0 * (x * x - x) * (2.0 * x - 1.0); };
    auto Xpp = [](double x) { return 2.0 * (6.0 * x * x - 6.0 * x + 1.0); };
    auto T = [](double t) { return (t * t - t) * (t * t - t); };
    auto Tp = [](double t) { return 2.0 * (t * t - t) * (2.0 * t - 1.0); };
    c.problem.exact = [X, T](const SpatialPoint& x, double t) { return X(x[0]) * T(t); };
    c.problem.exact_gradient = [X, Xp, T, Tp](const SpatialPoint& x, double t) {
        return std::array<double, 3>{Xp(x[0]) * T(t), 0.0, X(x[0]) * Tp(t)};
    };
    // Source consistent with du/dt - d2u/dx2 = f for the exact solution.
    c.problem.source = [X, Xpp, T, Tp](const SpatialPoint& x, double t) {
        return X(x[0]) * Tp(t) - Xpp(x[0]) * T(t);
    };
    c.problem.dirichlet = [](const SpatialPoint&, double) { return 0.0; };
    c.problem.initial = [](const SpatialPoint&) { return 0.0; };
    c.extent = {1.0, 1.0};
    c.duration = 1.0;
    c.stabilized = false;
    c.nl = default_nl(1e-6, NonlinearMethod::picard, 200);
    c.refine = RefineDirection::time;
    c.level_spans = {5, 10, 20, 40, 80};  // dt = 0.2 ... 0.0125 at degree 1
    c.default_nx = 101;
    c.default_nt = 21;
    c.default_slabs = 1;
    return c;
}

BenchmarkCase case_steady_convection_2d() {
    BenchmarkCase c;
    c.name = "steady_convection_2d";
    c.description =
        "Steady pure convection of a smooth sine wave across the unit square "
        "at 60 degrees; stabilized, measures spatial convergence";
    const double theta = kPi / 3.0;
    c.problem.d = 2;
    c.problem.transient = false;
    c.problem.mu = 0.0;
    c.problem.beta = [theta](const SpatialPoint&) {
        return Velocity{std::cos(theta), std::sin(theta)};
    };
    auto wave = [theta](const SpatialPoint& x) {
        return std::sin(2.0 * kPi * (x[0] - x[1] / std::tan(theta)));
    };
    c.problem.exact = [wave](const SpatialPoint& x, double) { return wave(x); };
    c.problem.exact_gradient = [theta](const SpatialPoint& x, double) {
        const double arg = 2.0 * kPi * (x[0] - x[1] / std::tan(theta));
        const double c2 = 2.0 * kPi * std::cos(arg);
        return std::array<double, 3>{c2, -c2 / std::tan(theta), 0.0};
    };
    c.problem.dirichlet = [wave](const SpatialPoint& x, double) { return wave(x); };
    c.extent = {1.0, 1.0};
    c.duration = 0.0;
    c.stabilized = true;
    c.stab = stab_params(10.0, 1e-6, 1e-5, 1e-10, true);
    c.nl = default_nl(1e-6, NonlinearMethod::hybrid, 400);
    c.refine = RefineDirection::space;
    c.level_spans = {19, 39, 79, 159};  // 20 ... 160 control points at degree 1
    c.default_nx = 40;
    c.default_nt = 0;
    c.default_slabs = 1;
    return c;
}

BenchmarkCase case_sharp_layer_1d() {
    BenchmarkCase c;
    c.name = "sharp_layer_1d";
    c.description =
        "1D transport of a Heaviside front at unit speed until t = 0.5; the "
        "stabilized solutions stay inside the data bounds";
    c.problem.d = 1;
    c.problem.transient = true;
    c.problem.mu = 0.0;
    c.problem.beta = [](const SpatialPoint&) { return Velocity{1.0, 0.0}; };
    auto step = [](double s) { return s < 0.0 ? 1.0 : (s > 0.0 ? 0.0 : 0.5); };
    c.problem.initial = [step](const SpatialPoint& x) { return step(x[0] - 0.25); };
    c.problem.exact = [step](const SpatialPoint& x, double t) {
        return step(x[0] - 0.25 - t);
    };
    c.problem.dirichlet = [step](const SpatialPoint& x, double t) {
        return step(x[0] - 0.25 - t);
    };
    c.extent = {1.0, 1.0};
    c.duration = 0.5;
    c.stabilized = true;
    c.stab = stab_params(10.0, 1e-6, 1e-8, 1e-10, true);
    c.nl = default_nl(1e-5, NonlinearMethod::hybrid, 300);
    c.refine = RefineDirection::space;
    c.default_nx = 25;
    c.default_nt = 25;
    c.default_slabs = 1;
    ProfileSpec prof;
    prof.kind = ProfileSpec::Kind::space_line_final_time;
    c.profile = prof;
    return c;
}

BenchmarkCase case_boundary_layer_2d() {
    BenchmarkCase c;
    c.name = "boundary_layer_2d";
    c.description =
        "Steady convection-diffusion (mu = 1e-4) at -60 degrees with an "
        "arctan inflow profile on y = 0; develops interior and boundary layers";
    const double theta = -kPi / 3.0;
    c.problem.d = 2;
    c.problem.transient = false;
    c.problem.mu = 1e-4;
    c.problem.beta = [theta](const SpatialPoint&) {
        return Velocity{std::cos(theta), std::sin(theta)};
    };
    c.problem.dirichlet = [](const SpatialPoint& x, double) {
        if (x[1] == 0.0) {
            return 0.5 + std::atan(1e-4 * (x[1] - 5.0 / 6.0)) / kPi;
        }
        return 0.0;
    };
    c.extent = {1.0, 1.0};
    c.duration = 0.0;
    c.stabilized = true;
    c.stab = stab_params(2.0, 1e-6, 1e-8, 1e-10, true);
    c.nl = default_nl(1e-8, NonlinearMethod::hybrid, 500);
    c.refine = RefineDirection::space;
    c.default_nx = 50;
    c.default_nt = 0;
    c.default_slabs = 1;
    ProfileSpec prof;
    prof.kind = ProfileSpec::Kind::line_fixed_y;
    prof.param = 0.1;
    c.profile = prof;
    return c;
}

BenchmarkCase case_three_body_rotation() {
    BenchmarkCase c;
    c.name = "three_body_rotation";
    c.description =
        "Solid-body rotation of a slotted cylinder, cone and cosine hump "
        "around the unit square center; one revolution returns the initial "
        "data, the L1 gap measures numerical dissipation";
    c.problem.d = 2;
    c.problem.transient = true;
    c.problem.mu = 0.0;
    c.problem.beta = [](const SpatialPoint& x) {
        return Velocity{-2.0 * kPi * (x[1] - 0.5), 2.0 * kPi * (x[0] - 0.5)};
    };
    // Standard rotating-bodies initial data: radius 0.15 fields centered at
    // (0.5, 0.75) slotted cylinder, (0.5, 0.25) cone, (0.25, 0.5) hump.
    auto bodies = [](const SpatialPoint& x) {
        const double r0 = 0.15;
        auto rad = [&](double cx, double cy) {
            return std::hypot(x[0] - cx, x[1] - cy) / r0;
        };
        const double rc = rad(0.5, 0.75);
        if (rc <= 1.0 && (std::abs(x[0] - 0.5) >= 0.025 || x[1] >= 0.85)) return 1.0;
        const double rk = rad(0.5, 0.25);
        if (rk <= 1.0) return 1.0 - rk;
        const double rh = rad(0.25, 0.5);
        if (rh <= 1.0) return 0.25 * (1.0 + std::cos(kPi * std::min(rh, 1.0)));
        return 0.0;
    };
    c.problem.initial = bodies;
    c.problem.exact = [bodies](const SpatialPoint& x, double t) {
        const double ang = -2.0 * kPi * t;
        const double dx = x[0] - 0.5;
        const double dy = x[1] - 0.5;
        const SpatialPoint back{0.5 + std::cos(ang) * dx - std::sin(ang) * dy,
                                0.5 + std::sin(ang) * dx + std::cos(ang) * dy};
        return bodies(back);
    };
    c.problem.dirichlet = [](const SpatialPoint&, double) { return 0.0; };
    c.extent = {1.0, 1.0};
    c.duration = 1.0;
    c.stabilized = true;
    c.stab = stab_params(10.0, 1e-6, 1e-8, 1e-10, true);
    c.nl = default_nl(1e-9, NonlinearMethod::hybrid, 300);
    c.refine = RefineDirection::space;
    c.default_nx = 50;
    c.default_nt = 241;  // 240 time spans, divisible into 60 and 120 slabs
    c.default_slabs = 60;
    ProfileSpec prof;
    prof.kind = ProfileSpec::Kind::circle_final_time;
    prof.param = 0.25;
    c.profile = prof;
    return c;
}

std::vector<std::string> case_names() {
    return {"transient_diffusion_1d", "steady_convection_2d", "sharp_layer_1d",
            "boundary_layer_2d", "three_body_rotation"};
}

BenchmarkCase get_case(const std::string& name) {
    if (name == "transient_diffusion_1d") return case_transient_diffusion_1d();
    if (name == "steady_convection_2d") return case_steady_convection_2d();
    if (name == "sharp_layer_1d") return case_sharp_layer_1d();
    if (name == "boundary_layer_2d") return case_boundary_layer_2d();
    if (name == "three_body_rotation") return case_three_body_rotation();
    throw std::invalid_argument("unknown case: " + name);
}

int align_time_spans(int spans, int slabs, int p) {
    const int unit = slabs * p;
    const int k = std::max(1, static_cast<int>(std::llround(double(spans) / unit)));
    return k * unit;
}

TensorSpace make_case_space(const BenchmarkCase& c, const RunOptions& opt) {
    const int p = opt.order;
    if (p < 1) throw std::invalid_argument("make_case_space: order must be >= 1");
    const int nx = (opt.nx > 0) ? opt.nx : c.default_nx;
    const int nt = (opt.nt > 0) ? opt.nt : c.default_nt;
    const int slabs = (opt.slabs > 0) ? opt.slabs : c.default_slabs;

    auto spans_for = [&](int control_points) {
        if (opt.k_refine) {
            if (control_points < 2) {
                throw std::invalid_argument("make_case_space: need >= 2 control points");
            }
            return k_refined_spans(control_points - 1, p);
        }
        if (control_points <= p) {
            throw std::invalid_argument(
                "make_case_space: control points must exceed the order");
        }
        return control_points - p;
    };

    std::vector<KnotVector> axes;
    for (int a = 0; a < c.problem.d; ++a) {
        axes.push_back(KnotVector::open_uniform(c.extent[a], spans_for(nx), p));
    }
    if (c.problem.transient) {
        int m_t = spans_for(nt);
        if (slabs > 1) m_t = align_time_spans(m_t, slabs, p);
        axes.push_back(KnotVector::open_uniform(c.duration, m_t, p));
    }
    return TensorSpace(std::move(axes), c.problem.transient);
}

CaseRun run_case(const BenchmarkCase& c, const RunOptions& opt) {
    CaseRun run;
    StabilizationParams stab = c.stab;
    NonlinearConfig nl = c.nl;
    run.stabilized = opt.stabilized.value_or(c.stabilized);
    if (opt.regularized) stab.regularized = *opt.regularized;
    if (opt.q) stab.q = *opt.q;
    if (opt.sigma) stab.sigma = *opt.sigma;
    if (opt.epsilon) stab.epsilon = *opt.epsilon;
    if (opt.gamma) stab.gamma = *opt.gamma;
    if (opt.tol) nl.tol = *opt.tol;
    if (opt.method) nl.method = *opt.method;
    if (opt.max_iters) nl.max_iters = *opt.max_iters;
    if (!stab.regularized && nl.method == NonlinearMethod::hybrid) {
        nl.method = NonlinearMethod::picard;
    }
    run.stab_used = stab;
    run.slabs = (opt.slabs > 0) ? opt.slabs : c.default_slabs;

    const TensorSpace space = make_case_space(c, opt);

    if (c.problem.transient) {
        const SlabChain chain = build_chain(space, run.slabs);
        ChainResult res = solve_chain(chain, c.problem, stab, nl, run.stabilized);
        run.trajectory = std::move(res.trajectory);
        run.per_slab = std::move(res.per_slab);
        run.converged = res.converged;
        run.failed_slab = res.failed_slab;
    } else {
        SystemMatrix sys = assemble_galerkin(space, c.problem);
        Constraints cons = make_constraints(space, c.problem);
        SolveResult solved;
        if (run.stabilized) {
            solved = solve_nonlinear(space, sys, cons, stab, nl);
        } else {
            solved.u = solve_galerkin(sys, cons);
            solved.converged = true;
            solved.iterations = 1;
        }
        run.converged = solved.converged;
        run.failed_slab = solved.converged ? -1 : 0;
        run.trajectory.spaces.push_back(space);
        run.trajectory.coeffs.push_back(solved.u);
        run.trajectory.constraints.push_back(std::move(cons));
        run.per_slab.push_back(std::move(solved));
    }
    run.report = audit_trajectory(run.trajectory, c.problem, stab, run.stabilized);
    return run;
}

DmpReport audit_trajectory(const Trajectory& traj, const ProblemData& problem,
                           const StabilizationParams& stab, bool stabilized,
                           double tol) {
    DmpReport total = traj.chained_audit();
    total.extrema_count = 0;
    total.theorem_violations = 0;
    if (traj.spaces.empty()) return total;

    // All transient slabs share one operator; steady runs have one space.
    SystemMatrix sys = assemble_galerkin(traj.spaces.front(), problem);
    DetectorGeometry geometry(traj.spaces.front());
    const auto scaled = stab.scaled(traj.spaces.front(), sys.beta_max);

    for (std::size_t l = 0; l < traj.spaces.size(); ++l) {
        StencilMatrix ktilde = sys.K;
        if (stabilized) {
            const StabilizationState st =
                assemble_stabilization(geometry, sys.K, traj.coeffs[l], scaled);
            ktilde = sys.K.added(st.B);
        }
        const DmpReport rep = dmp_audit(traj.spaces[l], traj.coeffs[l],
                                        traj.constraints[l], &ktilde, tol);
        total.extrema_count += rep.extrema_count;
        total.theorem_violations += rep.theorem_violations;
    }
    return total;
}

double l1_vs_initial(const Trajectory& traj, const ProblemData& problem) {
    const TensorSpace& last = traj.spaces.back();
    if (!last.transient()) {
        throw std::invalid_argument("l1_vs_initial: needs a transient trajectory");
    }
    std::vector<KnotVector> axes;
    for (int a = 0; a < last.ndim() - 1; ++a) axes.push_back(last.axis(a));
    const TensorSpace spatial(std::move(axes), false);
    const Eigen::VectorXd layer = traj.terminal_layer();
    const SplineField field(spatial, layer);

    const int nq = spatial.degree() + 2;
    const GaussRule& rule = gauss_legendre(nq);
    double l1 = 0.0;
    std::array<int, 2> span{0, 0};
    const int nd = spatial.ndim();
    while (true) {
        std::array<int, 2> qp{0, 0};
        while (true) {
            Point x{0.0, 0.0, 0.0};
            double w = 1.0;
            for (int a = 0; a < nd; ++a) {
                const KnotVector& kv = spatial.axis(a);
                const double h = kv.span_width();
                x[a] = kv.x_min() + (span[a] + 0.5 * (rule.points[qp[a]] + 1.0)) * h;
                w *= 0.5 * h * rule.weights[qp[a]];
            }
            const SpatialPoint xs{x[0], x[1]};
            l1 += w * std::abs(field.value(x) - problem.initial_at(xs));
            int a = 0;
            while (a < nd) {
                if (++qp[a] < nq) break;
                qp[a] = 0;
                ++a;
            }
            if (a == nd) break;
        }
        int a = 0;
        while (a < nd) {
            if (++span[a] < spatial.axis(a).spans()) break;
            span[a] = 0;
            ++a;
        }
        if (a == nd) break;
    }
    return l1;
}

std::vector<std::pair<double, double>> extract_profile(const Trajectory& traj,
                                                       const ProfileSpec& spec) {
    std::vector<std::pair<double, double>> out;
    out.reserve(spec.samples);
    const TensorSpace& sp = traj.spaces.back();
    switch (spec.kind) {
        case ProfileSpec::Kind::space_line_final_time: {
            const double L = sp.axis(0).length();
            const double T = sp.transient() ? sp.time_axis().x_max() : 0.0;
            for (int k = 0; k < spec.samples; ++k) {
                const double x = L * k / (spec.samples - 1.0);
                out.emplace_back(x, traj.value({x, 0.0}, T));
            }
            break;
        }
        case ProfileSpec::Kind::line_fixed_y: {
            const double L = sp.axis(0).length();
            for (int k = 0; k < spec.samples; ++k) {
                const double x = L * k / (spec.samples - 1.0);
                out.emplace_back(x, traj.value({x, spec.param}, 0.0));
            }
            break;
        }
        case ProfileSpec::Kind::circle_final_time: {
            const double T = sp.transient() ? sp.time_axis().x_max() : 0.0;
            for (int k = 0; k < spec.samples; ++k) {
                const double ang = 2.0 * kPi * k / spec.samples;
                const SpatialPoint x{0.5 + spec.param * std::cos(ang),
                                     0.5 + spec.param * std::sin(ang)};
                out.emplace_back(ang, traj.value(x, T));
            }
            break;
        }
    }
    return out;
}

}  // namespace stiga
