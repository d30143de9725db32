#pragma once

#include <vector>

#include "stiga/cases.hpp"

namespace stiga {

struct ConvergenceLevel {
    int level = 0;
    double h = 0.0;   // spatial knot spacing
    double dt = 0.0;  // temporal knot spacing (0 for steady)
    double l2 = 0.0;
    double h1 = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceLevel> levels;
    double l2_rate = 0.0;
    double h1_rate = 0.0;
};

/// Least-squares slope of log(err) against log(measure); errors shrinking
/// like measure^r report a positive rate r.
double lsq_rate(const std::vector<double>& measure, const std::vector<double>& err);

/// Refinement study over the case's level plan.  With k_refine the plan's
/// degree-1 control point counts are k-refined to the requested order
/// (control points grow like Lagrangian nodes); otherwise every level keeps
/// the planned control point count at that order.  Needs an exact solution.
ConvergenceResult run_convergence(const BenchmarkCase& c, int order, int n_levels,
                                  int slabs = 1, bool k_refine = true);

}  // namespace stiga
