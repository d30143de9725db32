#include "stiga/convergence.hpp"

#include <cmath>
#include <stdexcept>

namespace stiga {

double lsq_rate(const std::vector<double>& measure, const std::vector<double>& err) {
    if (measure.size() != err.size() || measure.size() < 2) {
        throw std::invalid_argument("lsq_rate: need at least two matching levels");
    }
    const int n = static_cast<int>(measure.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(measure[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceResult run_convergence(const BenchmarkCase& c, int order, int n_levels,
                                  int slabs, bool k_refine) {
    if (n_levels < 2) {
        throw std::invalid_argument("run_convergence: need at least two levels");
    }
    if (!c.problem.exact) {
        throw std::invalid_argument("run_convergence: case has no exact solution");
    }
    std::vector<int> plan = c.level_spans;
    if (plan.empty()) {
        throw std::invalid_argument("run_convergence: case has no refinement plan");
    }
    while (static_cast<int>(plan.size()) < n_levels) plan.push_back(plan.back() * 2);
    plan.resize(n_levels);

    ConvergenceResult result;
    std::vector<double> measures, l2s, h1s;
    for (int lvl = 0; lvl < n_levels; ++lvl) {
        RunOptions opt;
        opt.order = order;
        opt.k_refine = k_refine;
        opt.slabs = slabs;
        if (c.refine == RefineDirection::time) {
            opt.nt = plan[lvl] + 1;  // control points
            opt.nx = c.default_nx;
        } else {
            opt.nx = plan[lvl] + 1;
            opt.nt = c.default_nt;
        }
        const CaseRun run = run_case(c, opt);
        if (!run.converged) {
            throw SolverFailure("run_convergence: level " + std::to_string(lvl) +
                                " did not converge");
        }
        const ErrorNorms norms =
            run.trajectory.error_norms(c.problem.exact, c.problem.exact_gradient);

        ConvergenceLevel level;
        level.level = lvl;
        level.h = run.trajectory.spaces.front().axis(0).span_width();
        level.dt = c.problem.transient
                       ? run.trajectory.spaces.front().time_axis().span_width()
                       : 0.0;
        level.l2 = norms.l2;
        level.h1 = norms.h1_semi;
        result.levels.push_back(level);

        measures.push_back(c.refine == RefineDirection::time ? level.dt : level.h);
        l2s.push_back(level.l2);
        h1s.push_back(level.h1);
    }
    result.l2_rate = lsq_rate(measures, l2s);
    result.h1_rate = lsq_rate(measures, h1s);
    return result;
}

}  // namespace stiga
