#include "stiga/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/SparseLU>

namespace stiga {

Eigen::VectorXd LinearSolver::checked_solve(const Eigen::VectorXd& b) {
    Eigen::VectorXd x = lu_.solve(b);
    const double bnorm = b.norm();
    const double scale = (bnorm > 0.0) ? bnorm : 1.0;
    double res = (last_ * x - b).norm() / scale;
    for (int pass = 0; pass < 2 && res > 1e-12; ++pass) {
        const Eigen::VectorXd dx = lu_.solve(b - last_ * x);
        x += dx;
        res = (last_ * x - b).norm() / scale;
    }
    if (!(res <= 1e-10)) {
        throw SolverFailure("linear solve residual " + std::to_string(res) +
                            " exceeds contract; system likely singular or "
                            "severely ill-conditioned");
    }
    return x;
}

Eigen::VectorXd LinearSolver::solve(const Eigen::SparseMatrix<double>& A,
                                    const Eigen::VectorXd& b) {
    if (!analyzed_) {
        lu_.analyzePattern(A);
        analyzed_ = true;
    }
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success) {
        throw SolverFailure("sparse factorization failed: " + lu_.lastErrorMessage());
    }
    last_ = A;
    factorized_ = true;
    return checked_solve(b);
}

Eigen::VectorXd LinearSolver::resolve(const Eigen::VectorXd& b) {
    if (!factorized_) {
        throw SolverFailure("resolve called before any factorization");
    }
    return checked_solve(b);
}

Eigen::VectorXd solve_linear(const ReducedSystem& system) {
    LinearSolver solver;
    return solver.solve(system.A, system.b);
}

Eigen::VectorXd solve_galerkin(const SystemMatrix& sys, const Constraints& constraints) {
    const ReducedSystem red = apply_constraints(sys.K, sys.F, constraints);
    return constraints.merge(solve_linear(red));
}

namespace {

double norm_or_abs(double num, double den) {
    return (den > 0.0) ? num / den : num;
}

// Columns that can be perturbed together for the finite-difference Jacobian:
// residual row i depends on u_k only for |i - k|_inf <= p + 1, so columns
// spaced 2p + 3 apart per direction never share a row.
struct ColumnColoring {
    std::vector<std::vector<std::int64_t>> groups;  // full (not free) indices
};

ColumnColoring color_columns(const TensorSpace& space, const Constraints& constraints) {
    const int stride = 2 * (space.degree() + 1) + 1;
    int ncolors = 1;
    for (int a = 0; a < space.ndim(); ++a) ncolors *= stride;
    ColumnColoring coloring;
    coloring.groups.resize(ncolors);
    for (std::int64_t f = 0; f < constraints.n_free(); ++f) {
        const std::int64_t k = constraints.free_list[f];
        const MultiIndex mi = space.unflatten(k);
        int color = 0;
        int mul = 1;
        for (int a = 0; a < space.ndim(); ++a) {
            color += (mi[a] % stride) * mul;
            mul *= stride;
        }
        coloring.groups[color].push_back(k);
    }
    std::erase_if(coloring.groups, [](const auto& g) { return g.empty(); });
    return coloring;
}

Eigen::VectorXd free_residual(const SystemMatrix& sys, const Constraints& constraints,
                              const StencilMatrix& ktilde,
                              const Eigen::VectorXd& u_full) {
    const Eigen::VectorXd r = ktilde.multiply(u_full) - sys.F;
    return constraints.restrict_free(r);
}

Eigen::SparseMatrix<double> fd_jacobian_core(
    const TensorSpace& space, const SystemMatrix& sys, const Constraints& constraints,
    const StabilizationParams::Scaled& scaled, const DetectorGeometry& geometry,
    const ColumnColoring& coloring, const Eigen::VectorXd& u,
    const Eigen::VectorXd& r0) {
    const int reach = space.degree() + 1;
    // The perturbation must stay below the width of the regularized kinks
    // (~sqrt(eps_h) in gradient units) or the differences smear them and
    // Newton directions go bad near convergence.
    const double delta =
        1e-8 * (1.0 + constraints.restrict_free(u).lpNorm<Eigen::Infinity>());

    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd u_pert = u;
    for (const auto& group : coloring.groups) {
        for (const std::int64_t k : group) u_pert[k] += delta;
        const StabilizationState stab =
            assemble_stabilization(geometry, sys.K, u_pert, scaled);
        const StencilMatrix kt = sys.K.added(stab.B);
        const Eigen::VectorXd r1 = free_residual(sys, constraints, kt, u_pert);
        for (const std::int64_t k : group) {
            const MultiIndex mk = space.unflatten(k);
            const std::int64_t fk = constraints.full_to_free[k];
            MultiIndex lo{0, 0, 0};
            MultiIndex hi{0, 0, 0};
            for (int a = 0; a < space.ndim(); ++a) {
                lo[a] = std::max(0, mk[a] - reach);
                hi[a] = std::min(space.size(a) - 1, mk[a] + reach);
            }
            MultiIndex mi = lo;
            while (true) {
                const std::int64_t i = space.flatten(mi);
                const std::int64_t fi = constraints.full_to_free[i];
                if (fi >= 0) {
                    // Keep exact zeros so the pattern stays fixed across
                    // iterations and the symbolic analysis can be reused.
                    trips.emplace_back(static_cast<int>(fi), static_cast<int>(fk),
                                       (r1[fi] - r0[fi]) / delta);
                }
                int a = 0;
                while (a < space.ndim()) {
                    if (++mi[a] <= hi[a]) break;
                    mi[a] = lo[a];
                    ++a;
                }
                if (a == space.ndim()) break;
            }
            u_pert[k] = u[k];
        }
    }
    Eigen::SparseMatrix<double> J(constraints.n_free(), constraints.n_free());
    J.setFromTriplets(trips.begin(), trips.end());
    J.makeCompressed();
    return J;
}

class NonlinearDriver {
public:
    NonlinearDriver(const TensorSpace& space, const SystemMatrix& sys,
                    const Constraints& constraints, const StabilizationParams& params,
                    const NonlinearConfig& config, const DetectorGeometry* geometry)
        : space_(space),
          sys_(sys),
          constraints_(constraints),
          config_(config),
          scaled_(params.scaled(space, sys.beta_max)) {
        if (!(config.relaxation > 0.0 && config.relaxation <= 1.0)) {
            throw std::invalid_argument("NonlinearConfig: relaxation must be in (0, 1]");
        }
        if (!(config.tol > 0.0)) {
            throw std::invalid_argument("NonlinearConfig: tol must be positive");
        }
        if (config.method == NonlinearMethod::hybrid && !scaled_.regularized) {
            throw std::invalid_argument(
                "solve_nonlinear: the hybrid method requires the regularized "
                "stabilization");
        }
        if (geometry == nullptr) {
            owned_geometry_ = std::make_unique<DetectorGeometry>(space);
            geometry_ = owned_geometry_.get();
        } else {
            geometry_ = geometry;
        }
    }

    SolveResult run(std::optional<Eigen::VectorXd> guess) {
        SolveResult result;
        Eigen::VectorXd u = guess ? std::move(*guess) : default_guess();

        StabilizationState stab = assemble_stabilization(*geometry_, sys_.K, u, scaled_);
        StencilMatrix ktilde = sys_.K.added(stab.B);
        {
            const ReducedSystem red0 = apply_constraints(ktilde, sys_.F, constraints_);
            bscale_ = red0.b.norm();
        }
        double res = norm_or_abs(residual_free(ktilde, u).norm(), bscale_);

        // Both phases damp their step by a shared factor.  Residual growth
        // halves it (full steps are not contractive near the detector
        // kinks); recovery is throttled by a sticky cap so the iteration
        // does not repeatedly overshoot the step size that last failed.
        char phase = 'P';
        double damping = 1.0;
        int grow_streak = 0;
        bool jacobian_fresh = false;
        int jacobian_age = 0;
        // Once the iterate has almost settled, Picard steps reuse the last
        // factorized operator for several iterations; the step direction is
        // then -M^{-1} r with M close to the current matrix.
        bool picard_frozen = false;
        int picard_age = 0;
        // Newton makes no useful progress once the iterate reaches the
        // kink-scale neighborhood of the solution; detect stagnation over a
        // window and hand the endgame to Picard for good.
        int newton_window = 0;
        double newton_window_res = 0.0;
        double prev_update = std::numeric_limits<double>::infinity();
        double prev_res = res;
        double newton_reentry = std::numeric_limits<double>::infinity();

        for (int iter = 1; iter <= config_.max_iters; ++iter) {
            Eigen::VectorXd u_free = constraints_.restrict_free(u);
            const Eigen::VectorXd r0 = residual_free(ktilde, u);
            Eigen::VectorXd step;
            if (phase == 'P') {
                if (picard_frozen && picard_age < 8 && picard_solver_.factorized()) {
                    step = (config_.relaxation * damping) * picard_solver_.resolve(-r0);
                    ++picard_age;
                } else {
                    const ReducedSystem red =
                        apply_constraints(ktilde, sys_.F, constraints_);
                    step = (config_.relaxation * damping) *
                           picard_solver_.solve(red.A, -r0);
                    picard_age = 0;
                }
            } else {
                if (config_.jacobian == JacobianKind::picard_operator) {
                    if (!jacobian_fresh || jacobian_age >= 8) {
                        const ReducedSystem red =
                            apply_constraints(ktilde, sys_.F, constraints_);
                        step = damping * newton_solver_.solve(red.A, -r0);
                        jacobian_fresh = true;
                        jacobian_age = 0;
                    } else {
                        step = damping * newton_solver_.resolve(-r0);
                        ++jacobian_age;
                    }
                } else {
                    if (!jacobian_fresh || jacobian_age >= 8) {
                        const Eigen::SparseMatrix<double> J = fd_jacobian(u, r0);
                        step = damping * newton_solver_.solve(J, -r0);
                        jacobian_fresh = true;
                        jacobian_age = 0;
                    } else {
                        step = damping * newton_solver_.resolve(-r0);
                        ++jacobian_age;
                    }
                }
            }

            const double update = norm_or_abs(step.norm(), u_free.norm());
            u = constraints_.merge(u_free + step);

            stab = assemble_stabilization(*geometry_, sys_.K, u, scaled_);
            ktilde = sys_.K.added(stab.B);
            res = norm_or_abs(residual_free(ktilde, u).norm(), bscale_);

            result.history.push_back({iter, update, res, phase});
            result.iterations = iter;

            if (update < config_.tol && res <= 10.0 * config_.tol) {
                result.converged = true;
                break;
            }


            if (res > prev_res) {
                damping = std::max(damping * 0.25, 1.0 / 16384.0);
                jacobian_fresh = false;  // rebuild at the new point
                picard_age = 1000;       // likewise for the frozen operator
            } else {
                damping = std::min(damping * 1.6, 1.0);
            }
            grow_streak = (update > prev_update) ? grow_streak + 1 : 0;

            if (phase == 'N') {
                ++newton_window;
                if (newton_window == 1) newton_window_res = res;
                if (newton_window >= 15) {
                    if (res > 0.5 * newton_window_res) {
                        // Stagnating at the kink scale; finish with Picard
                        // steps against the (now nearly converged) frozen
                        // operator, at a fresh step size.
                        phase = 'P';
                        newton_reentry = 0.0;
                        picard_frozen = true;
                        damping = 1.0;
                    }
                    newton_window = 0;
                }
            }
            if (phase == 'N' && grow_streak >= 3) {
                // Diverging outright; grind with Picard until the updates
                // contract well below the failure level.
                phase = 'P';
                grow_streak = 0;
                newton_reentry = std::min(newton_reentry, update / 4.0);
            } else if (phase == 'P' && config_.method == NonlinearMethod::hybrid &&
                       update < config_.hybrid_switch_tol && update < newton_reentry) {
                phase = 'N';
                grow_streak = 0;
                newton_window = 0;
            }
            prev_update = update;
            prev_res = res;
        }
        result.u = std::move(u);
        return result;
    }

private:
    Eigen::VectorXd default_guess() const {
        Eigen::VectorXd u;
        try {
            u = solve_galerkin(sys_, constraints_);
        } catch (const SolverFailure&) {
            // Singular unstabilized operator; start from the data midpoint.
            const double mid = 0.5 * (constraints_.data_min + constraints_.data_max);
            return constraints_.merge(
                Eigen::VectorXd::Constant(constraints_.n_free(), mid));
        }
        if (constraints_.n_free() < space_.total_points()) {
            for (std::int64_t f = 0; f < constraints_.n_free(); ++f) {
                double& v = u[constraints_.free_list[f]];
                v = std::clamp(v, constraints_.data_min, constraints_.data_max);
            }
        }
        return u;
    }

    Eigen::VectorXd residual_free(const StencilMatrix& ktilde,
                                  const Eigen::VectorXd& u_full) const {
        return free_residual(sys_, constraints_, ktilde, u_full);
    }

    Eigen::SparseMatrix<double> fd_jacobian(const Eigen::VectorXd& u,
                                            const Eigen::VectorXd& r0) {
        if (coloring_.groups.empty()) coloring_ = color_columns(space_, constraints_);
        return fd_jacobian_core(space_, sys_, constraints_, scaled_, *geometry_,
                                coloring_, u, r0);
    }

    const TensorSpace& space_;
    const SystemMatrix& sys_;
    const Constraints& constraints_;
    const NonlinearConfig& config_;
    StabilizationParams::Scaled scaled_;
    double bscale_ = 0.0;
    const DetectorGeometry* geometry_ = nullptr;
    std::unique_ptr<DetectorGeometry> owned_geometry_;
    LinearSolver picard_solver_;
    LinearSolver newton_solver_;
    ColumnColoring coloring_;
};

}  // namespace

SolveResult solve_nonlinear(const TensorSpace& space, const SystemMatrix& sys,
                            const Constraints& constraints,
                            const StabilizationParams& params,
                            const NonlinearConfig& config,
                            const DetectorGeometry* geometry,
                            std::optional<Eigen::VectorXd> initial_guess) {
    NonlinearDriver driver(space, sys, constraints, params, config, geometry);
    return driver.run(std::move(initial_guess));
}

Eigen::VectorXd stabilized_residual(const TensorSpace& space, const SystemMatrix& sys,
                                    const Constraints& constraints,
                                    const StabilizationParams& params,
                                    const Eigen::VectorXd& u_full) {
    const auto scaled = params.scaled(space, sys.beta_max);
    const DetectorGeometry geometry(space);
    const StabilizationState stab =
        assemble_stabilization(geometry, sys.K, u_full, scaled);
    return free_residual(sys, constraints, sys.K.added(stab.B), u_full);
}

Eigen::SparseMatrix<double> residual_jacobian(const TensorSpace& space,
                                              const SystemMatrix& sys,
                                              const Constraints& constraints,
                                              const StabilizationParams& params,
                                              const Eigen::VectorXd& u_full) {
    const auto scaled = params.scaled(space, sys.beta_max);
    const DetectorGeometry geometry(space);
    const ColumnColoring coloring = color_columns(space, constraints);
    const StabilizationState stab =
        assemble_stabilization(geometry, sys.K, u_full, scaled);
    const Eigen::VectorXd r0 =
        free_residual(sys, constraints, sys.K.added(stab.B), u_full);
    return fd_jacobian_core(space, sys, constraints, scaled, geometry, coloring, u_full,
                            r0);
}

}  // namespace stiga
