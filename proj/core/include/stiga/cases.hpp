#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stiga/problem.hpp"
#include "stiga/solver.hpp"
#include "stiga/stabilization.hpp"
#include "stiga/timeslabs.hpp"

namespace stiga {

/// Line extraction emitted as profile.csv.
struct ProfileSpec {
    enum class Kind {
        space_line_final_time,  // u(x, T) over the first spatial direction
        line_fixed_y,           // u(x, param) for a steady 2D field
        circle_final_time       // u on a circle of radius param about (0.5, 0.5) at T
    };
    Kind kind = Kind::space_line_final_time;
    double param = 0.0;
    int samples = 512;
};

enum class RefineDirection { time, space };

/// One registered benchmark problem with its defaults and refinement plan.
struct BenchmarkCase {
    std::string name;
    std::string description;
    ProblemData problem;
    std::array<double, 2> extent{1.0, 1.0};  // spatial lengths
    double duration = 0.0;                   // final time, 0 for steady
    bool stabilized = true;
    StabilizationParams stab;
    NonlinearConfig nl;
    RefineDirection refine = RefineDirection::space;
    // Base (degree-1) span counts of the refinement series.
    std::vector<int> level_spans;
    int default_order = 1;
    int default_nx = 0;  // control points per spatial direction at degree 1
    int default_nt = 0;  // time control points at degree 1 (0 = steady)
    int default_slabs = 1;
    std::optional<ProfileSpec> profile;
};

BenchmarkCase case_transient_diffusion_1d();
BenchmarkCase case_steady_convection_2d();
BenchmarkCase case_sharp_layer_1d();
BenchmarkCase case_boundary_layer_2d();
BenchmarkCase case_three_body_rotation();

std::vector<std::string> case_names();
BenchmarkCase get_case(const std::string& name);

/// Discretization request resolved against a case.
struct RunOptions {
    int order = 1;
    bool k_refine = true;  // interpret nx/nt as degree-1 base counts
    int nx = 0;            // control points per spatial direction (0 = case default)
    int nt = 0;            // time control points (0 = case default)
    int slabs = 0;         // 0 = case default
    std::optional<bool> stabilized;
    std::optional<bool> regularized;
    std::optional<double> q, sigma, epsilon, gamma, tol;
    std::optional<NonlinearMethod> method;
    std::optional<int> max_iters;
};

/// Tensor space for a case at the requested discretization.  With k_refine
/// the counts are degree-1 control points and span counts grow so control
/// points match Lagrangian nodes; otherwise the counts are control points
/// at the requested order.  Time spans are rounded to the nearest multiple
/// of slabs * p when needed.
TensorSpace make_case_space(const BenchmarkCase& c, const RunOptions& opt);

/// Nearest positive multiple of slabs * p to `spans`.
int align_time_spans(int spans, int slabs, int p);

struct CaseRun {
    Trajectory trajectory;
    std::vector<SolveResult> per_slab;
    bool converged = true;
    int failed_slab = -1;
    DmpReport report;  // chained bounds + summed extremum/structural counts
    StabilizationParams stab_used;
    bool stabilized = true;
    int slabs = 1;
};

CaseRun run_case(const BenchmarkCase& c, const RunOptions& opt);

/// Structural audit of a finished run (rebuilds K and B per slab).
DmpReport audit_trajectory(const Trajectory& traj, const ProblemData& problem,
                           const StabilizationParams& stab, bool stabilized,
                           double tol = 1e-10);

/// L1 distance between the terminal spatial slice and the initial data.
double l1_vs_initial(const Trajectory& traj, const ProblemData& problem);

/// Profile samples (coordinate, value).
std::vector<std::pair<double, double>> extract_profile(const Trajectory& traj,
                                                       const ProfileSpec& spec);

}  // namespace stiga
