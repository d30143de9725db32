#include "stiga/timeslabs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stiga {

SlabChain build_chain(const TensorSpace& space, int n_slabs) {
    if (!space.transient()) {
        throw std::invalid_argument("build_chain: space has no time direction");
    }
    if (n_slabs < 1) {
        throw std::invalid_argument("build_chain: need at least one slab");
    }
    const KnotVector& time = space.time_axis();
    const int p = space.degree();
    const int m_t = time.spans();
    if (m_t % n_slabs != 0) {
        throw std::invalid_argument("build_chain: time spans not divisible by slab count");
    }
    const int spans = m_t / n_slabs;
    // A single slab is the monolithic space itself; only true partitions
    // decouple by knot insertion and need widths of n * p * dt.
    if (n_slabs > 1 && spans % p != 0) {
        throw std::invalid_argument(
            "build_chain: slab width must be an integer multiple of p * dt");
    }

    SlabChain chain;
    chain.spans_per_slab = spans;
    const double dt = time.span_width();
    const double width = spans * dt;
    chain.boundaries.resize(n_slabs + 1);
    for (int l = 0; l <= n_slabs; ++l) {
        chain.boundaries[l] = time.x_min() + l * width;
    }
    chain.boundaries[n_slabs] = time.x_max();

    for (int l = 0; l < n_slabs; ++l) {
        std::vector<KnotVector> axes;
        for (int a = 0; a < space.ndim() - 1; ++a) axes.push_back(space.axis(a));
        axes.push_back(
            KnotVector::open_uniform(width, spans, p, chain.boundaries[l]));
        chain.slabs.emplace_back(std::move(axes), true);
    }
    return chain;
}

double Trajectory::value(const SpatialPoint& x, double t) const {
    int slab = 0;
    if (spaces.front().transient()) {
        for (int l = 0; l < static_cast<int>(spaces.size()); ++l) {
            if (t <= spaces[l].time_axis().x_max() ||
                l + 1 == static_cast<int>(spaces.size())) {
                slab = l;
                break;
            }
        }
    }
    const TensorSpace& sp = spaces[slab];
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < sp.spatial_dims(); ++a) p[a] = x[a];
    if (sp.transient()) p[sp.ndim() - 1] = t;
    return SplineField(sp, coeffs[slab]).value(p);
}

Eigen::VectorXd Trajectory::terminal_layer() const {
    const TensorSpace& sp = spaces.back();
    std::int64_t layer = 1;
    for (int a = 0; a < sp.ndim() - 1; ++a) layer *= sp.size(a);
    return coeffs.back().tail(layer);
}

ErrorNorms Trajectory::error_norms(const ScalarFn& exact,
                                   const GradientFn& exact_gradient,
                                   int points_per_span) const {
    ErrorIntegrals total;
    for (std::size_t l = 0; l < spaces.size(); ++l) {
        total.accumulate(
            error_integrals(spaces[l], coeffs[l], exact, exact_gradient, points_per_span));
    }
    return total.finalize();
}

double Trajectory::min_coeff() const {
    double m = coeffs.front().minCoeff();
    for (const auto& c : coeffs) m = std::min(m, c.minCoeff());
    return m;
}

double Trajectory::max_coeff() const {
    double m = coeffs.front().maxCoeff();
    for (const auto& c : coeffs) m = std::max(m, c.maxCoeff());
    return m;
}

DmpReport Trajectory::chained_audit() const {
    DmpReport rep;
    // Data range: slab-0 initial and Dirichlet values of every slab.  Later
    // initial layers are transfers, not data.
    bool have_data = false;
    bool have_free = false;
    for (std::size_t l = 0; l < spaces.size(); ++l) {
        const TensorSpace& sp = spaces[l];
        const std::int64_t n = sp.total_points();
        for (std::int64_t i = 0; i < n; ++i) {
            const PointClass cls = constraints[l].labels[i];
            const bool is_data =
                (cls == PointClass::dirichlet) || (cls == PointClass::initial && l == 0);
            if (is_data) {
                const double v = constraints[l].values[i];
                if (!have_data) {
                    rep.data_min = rep.data_max = v;
                    have_data = true;
                } else {
                    rep.data_min = std::min(rep.data_min, v);
                    rep.data_max = std::max(rep.data_max, v);
                }
            } else {
                const double v = coeffs[l][i];
                if (!have_free) {
                    rep.free_min = rep.free_max = v;
                    have_free = true;
                } else {
                    rep.free_min = std::min(rep.free_min, v);
                    rep.free_max = std::max(rep.free_max, v);
                }
            }
        }
    }
    if (have_data && have_free) {
        rep.violation = std::max(0.0, std::max(rep.data_min - rep.free_min,
                                               rep.free_max - rep.data_max));
    }
    return rep;
}

ChainResult solve_chain(const SlabChain& chain, const ProblemData& problem,
                        const StabilizationParams& stab_params,
                        const NonlinearConfig& nl_config, bool stabilized) {
    ChainResult result;
    if (chain.slabs.empty()) return result;

    // All slabs share spatial axes and a translated time axis, so the
    // Galerkin matrix, detector geometry, classification and the Galerkin
    // initial-guess factorization are assembled once.  The load vector does
    // depend on t and is reassembled per slab.
    const TensorSpace& proto = chain.slabs.front();
    SystemMatrix sys = assemble_galerkin(proto, problem);
    const DetectorGeometry geometry(proto);
    LinearSolver guess_solver;

    std::int64_t layer = 1;
    for (int a = 0; a < proto.ndim() - 1; ++a) layer *= proto.size(a);

    for (int l = 0; l < chain.size(); ++l) {
        const TensorSpace& slab = chain.slabs[l];
        if (l > 0) {
            // K and beta_max are translates across slabs; only F moves with t.
            sys.F = assemble_load(slab, problem);
        }
        Constraints cons = make_constraints(slab, problem);
        if (l > 0) {
            const Eigen::VectorXd transfer =
                result.trajectory.coeffs.back().tail(layer);
            for (std::int64_t s = 0; s < layer; ++s) {
                if (cons.labels[s] == PointClass::initial) {
                    cons.values[s] = transfer[s];
                    cons.data_min = std::min(cons.data_min, transfer[s]);
                    cons.data_max = std::max(cons.data_max, transfer[s]);
                }
            }
        }

        SolveResult solved;
        if (stabilized) {
            Eigen::VectorXd guess;
            if (l > 0) {
                // The solution moves little within one slab; replicating the
                // transferred layer beats the Galerkin start and stays
                // inside the data bounds by construction.
                guess.resize(slab.total_points());
                const std::int64_t layers = slab.total_points() / layer;
                for (std::int64_t k = 0; k < layers; ++k) {
                    guess.segment(k * layer, layer) = cons.values.head(layer);
                }
                guess = cons.merge(cons.restrict_free(guess));
            } else {
                const ReducedSystem red = apply_constraints(sys.K, sys.F, cons);
                try {
                    guess = cons.merge(guess_solver.solve(red.A, red.b));
                    for (std::int64_t f = 0; f < cons.n_free(); ++f) {
                        double& v = guess[cons.free_list[f]];
                        v = std::clamp(v, cons.data_min, cons.data_max);
                    }
                } catch (const SolverFailure&) {
                    guess = cons.merge(Eigen::VectorXd::Constant(
                        cons.n_free(), 0.5 * (cons.data_min + cons.data_max)));
                }
            }
            solved = solve_nonlinear(slab, sys, cons, stab_params, nl_config, &geometry,
                                     std::move(guess));
        } else {
            const ReducedSystem red = apply_constraints(sys.K, sys.F, cons);
            solved.u = cons.merge(guess_solver.solve(red.A, red.b));
            solved.converged = true;
            solved.iterations = 1;
        }

        result.trajectory.spaces.push_back(slab);
        result.trajectory.coeffs.push_back(solved.u);
        result.trajectory.constraints.push_back(std::move(cons));
        const bool ok = solved.converged;
        result.per_slab.push_back(std::move(solved));
        if (!ok) {
            result.converged = false;
            result.failed_slab = l;
            break;
        }
    }
    return result;
}

}  // namespace stiga
