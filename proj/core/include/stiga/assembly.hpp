#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "stiga/problem.hpp"
#include "stiga/stencil_matrix.hpp"
#include "stiga/tensor_space.hpp"

namespace stiga {

/// Unconstrained Galerkin operator K and load vector F over all control
/// points.  The operator is the (d+1)-dimensional convection-diffusion
/// operator with velocity (beta, 1) and diffusion diag(mu, ..., mu, 0);
/// steady spaces drop the time direction.
struct SystemMatrix {
    StencilMatrix K;
    Eigen::VectorXd F;
    double beta_max = 0.0;  // max |beta| over quadrature points
};

/// Tensor Gauss-Legendre assembly with `points_per_span` points per
/// direction per knot span (0 selects degree + 1, exact for constant
/// coefficients).
SystemMatrix assemble_galerkin(const TensorSpace& space, const ProblemData& problem,
                               int points_per_span = 0);

/// Load vector (g, B_i) alone; cheap compared to K.
Eigen::VectorXd assemble_load(const TensorSpace& space, const ProblemData& problem,
                              int points_per_span = 0);

/// Constrained index set plus values sampled at the Greville abscissae.
struct Constraints {
    std::vector<PointClass> labels;
    Eigen::VectorXd values;               // meaningful on constrained slots
    std::vector<std::int64_t> free_list;  // ascending flat indices
    std::vector<std::int64_t> full_to_free;  // -1 on constrained slots
    double data_min = 0.0;
    double data_max = 0.0;

    bool constrained(std::int64_t i) const { return full_to_free[i] < 0; }
    std::int64_t n_free() const { return static_cast<std::int64_t>(free_list.size()); }

    Eigen::VectorXd merge(const Eigen::VectorXd& free_values) const;
    Eigen::VectorXd restrict_free(const Eigen::VectorXd& full) const;
};

Constraints make_constraints(const TensorSpace& space, const ProblemData& problem);

/// Square system over the free points after eliminating constrained rows
/// and columns of A; b collects F minus the constrained-column action.
struct ReducedSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
};

ReducedSystem apply_constraints(const StencilMatrix& A, const Eigen::VectorXd& F,
                                const Constraints& constraints);

/// Spline field u_h = sum_i c_i B_i over a tensor space (non-owning view).
class SplineField {
public:
    SplineField(const TensorSpace& space, const Eigen::VectorXd& coeffs)
        : space_(&space), coeffs_(&coeffs) {}

    double value(const Point& x) const;
    /// Full gradient, one component per direction of the space.
    Point gradient(const Point& x) const;

private:
    const TensorSpace* space_;
    const Eigen::VectorXd* coeffs_;
};

struct ErrorNorms {
    double l2 = 0.0;       // relative unless `absolute`
    double h1_semi = 0.0;
    bool absolute = false;  // exact solution had zero norm
};

/// Relative L2 and H1 seminorm of (u_h - exact) over the whole domain using
/// the assembly quadrature; the seminorm uses the full space-time gradient.
/// Falls back to central differences of `exact` when no gradient is given.
ErrorNorms error_norms(const TensorSpace& space, const Eigen::VectorXd& coeffs,
                       const ScalarFn& exact, const GradientFn& exact_gradient,
                       int points_per_span = 0);

/// Raw integrals needed to accumulate norms across several spaces.
struct ErrorIntegrals {
    double err_l2_sq = 0.0;
    double err_h1_sq = 0.0;
    double exact_l2_sq = 0.0;
    double exact_h1_sq = 0.0;

    void accumulate(const ErrorIntegrals& other);
    ErrorNorms finalize() const;
};

ErrorIntegrals error_integrals(const TensorSpace& space, const Eigen::VectorXd& coeffs,
                               const ScalarFn& exact, const GradientFn& exact_gradient,
                               int points_per_span = 0);

}  // namespace stiga
