#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stiga/assembly.hpp"
#include "stiga/solver.hpp"
#include "stiga/stabilization.hpp"
#include "stiga/tensor_space.hpp"

namespace stiga {

/// Partition of a transient space into sequential time slabs.  Every slab
/// carries its own open time knot vector on [t_l, t_{l+1}] with the
/// inherited knot spacing, which decouples the slab spaces exactly as a
/// p-fold knot insertion at each interface would.
struct SlabChain {
    std::vector<TensorSpace> slabs;
    std::vector<double> boundaries;  // t_0 < t_1 < ... < t_n
    int spans_per_slab = 0;

    int size() const { return static_cast<int>(slabs.size()); }
};

/// Splits the time direction into n_slabs equal slabs.  The span count must
/// divide evenly and each slab must hold an integer multiple of p spans
/// (slab width = n * p * dt).
SlabChain build_chain(const TensorSpace& space, int n_slabs);

/// Piecewise (C0 in time) space-time solution over a slab chain.
struct Trajectory {
    std::vector<TensorSpace> spaces;
    std::vector<Eigen::VectorXd> coeffs;
    std::vector<Constraints> constraints;

    /// Evaluate at a space-time point (slab chosen by t).
    double value(const SpatialPoint& x, double t) const;
    /// Terminal spatial slice as (space of the last slab, layer coefficients).
    Eigen::VectorXd terminal_layer() const;

    ErrorNorms error_norms(const ScalarFn& exact, const GradientFn& exact_gradient,
                           int points_per_span = 0) const;

    /// Global bounds audit of the whole chain: all coefficients of every
    /// slab against the original data (initial layer of slab 0 plus all
    /// Dirichlet values).
    DmpReport chained_audit() const;

    double min_coeff() const;
    double max_coeff() const;
};

struct ChainResult {
    Trajectory trajectory;
    bool converged = true;
    int failed_slab = -1;  // first non-converged slab, -1 when all converged
    std::vector<SolveResult> per_slab;
};

/// Sequential solve of the chain; slab l+1 takes its initial layer directly
/// from the terminal coefficient layer of slab l (both are interpolatory in
/// time).  With `stabilized` false this is the plain Galerkin scheme.
ChainResult solve_chain(const SlabChain& chain, const ProblemData& problem,
                        const StabilizationParams& stab_params,
                        const NonlinearConfig& nl_config, bool stabilized = true);

}  // namespace stiga
