#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "stiga/assembly.hpp"
#include "stiga/stabilization.hpp"

namespace stiga {

struct SolverFailure : std::runtime_error {
    explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

enum class NonlinearMethod { picard, hybrid };
enum class JacobianKind { finite_difference, picard_operator };

struct NonlinearConfig {
    double tol = 1e-6;            // relative update tolerance
    int max_iters = 200;
    double relaxation = 0.5;      // Picard relaxation in (0, 1]
    NonlinearMethod method = NonlinearMethod::picard;
    double hybrid_switch_tol = 1e-4;  // update size at which Newton takes over
    JacobianKind jacobian = JacobianKind::finite_difference;
};

/// Direct sparse solve with the residual contract |Ax - b| / |b| <= 1e-10.
/// Reuses the symbolic analysis across calls with an identical pattern, and
/// can re-solve against the last factorized matrix.
class LinearSolver {
public:
    Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& A,
                          const Eigen::VectorXd& b);

    /// Solve with the factorization from the previous solve() call; the
    /// residual contract is checked against the stored matrix.
    Eigen::VectorXd resolve(const Eigen::VectorXd& b);

    bool factorized() const { return factorized_; }

private:
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    Eigen::SparseMatrix<double> last_;
    bool analyzed_ = false;
    bool factorized_ = false;

    Eigen::VectorXd checked_solve(const Eigen::VectorXd& b);
};

/// One-shot convenience wrapper.
Eigen::VectorXd solve_linear(const ReducedSystem& system);

struct IterationRecord {
    int iter = 0;
    double update_norm = 0.0;
    double residual_norm = 0.0;
    char phase = 'P';  // 'P' Picard, 'N' Newton
};

struct SolveResult {
    Eigen::VectorXd u;  // full coefficient vector, constrained values merged
    int iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> history;
};

/// Unstabilized Galerkin solve (also the default nonlinear initial guess).
Eigen::VectorXd solve_galerkin(const SystemMatrix& sys, const Constraints& constraints);

/// Free-row residual R(u) = ((K + B(u)) u - F)|free of the stabilized system.
Eigen::VectorXd stabilized_residual(const TensorSpace& space, const SystemMatrix& sys,
                                    const Constraints& constraints,
                                    const StabilizationParams& params,
                                    const Eigen::VectorXd& u_full);

/// Finite-difference Jacobian of the stabilized residual over the free
/// points, assembled by simultaneous column perturbations on the stencil
/// coloring (residual rows reach p + 1 indices per direction).
Eigen::SparseMatrix<double> residual_jacobian(const TensorSpace& space,
                                              const SystemMatrix& sys,
                                              const Constraints& constraints,
                                              const StabilizationParams& params,
                                              const Eigen::VectorXd& u_full);

/// Fixed-point solve of (K + B(u)) u = F with constraints applied after the
/// stabilization matrix is added.  Relaxed Picard by default; the hybrid
/// method switches to Newton with a stencil-sparse finite-difference
/// Jacobian once updates are small, and falls back to Picard when Newton
/// updates grow three times in a row.
SolveResult solve_nonlinear(const TensorSpace& space, const SystemMatrix& sys,
                            const Constraints& constraints,
                            const StabilizationParams& params,
                            const NonlinearConfig& config,
                            const DetectorGeometry* geometry = nullptr,
                            std::optional<Eigen::VectorXd> initial_guess = std::nullopt);

}  // namespace stiga
