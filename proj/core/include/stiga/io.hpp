#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stiga/cases.hpp"
#include "stiga/convergence.hpp"
#include "stiga/knots.hpp"
#include "stiga/solver.hpp"
#include "stiga/stabilization.hpp"

namespace stiga {

/// Contents of a solution.bin file.  All integers and IEEE-754 doubles are
/// little endian; the layout is: magic "STSB", version, degree, spatial
/// dimension, transient flag, slab count, the spatial knot vectors, per-slab
/// time knot vectors (transient only), per-slab coefficient blocks in
/// lexicographic order (first direction fastest, time slowest), then the
/// run metadata (case name and stabilization parameters).
struct SolutionFile {
    int degree = 1;
    int d = 1;
    bool transient = true;
    std::vector<std::vector<double>> spatial_knots;
    std::vector<std::vector<double>> time_knots;  // one per slab
    std::vector<Eigen::VectorXd> coeffs;          // one per slab
    std::string case_name;
    bool stabilized = true;
    StabilizationParams stab;

    /// Rebuild the per-slab tensor spaces.
    std::vector<TensorSpace> spaces() const;
};

void write_solution(const std::string& path, const SolutionFile& file);
SolutionFile read_solution(const std::string& path);

SolutionFile to_solution_file(const CaseRun& run, const std::string& case_name);

// CSV emission; files are always rewritten in full.
void write_errors_csv(const std::string& path, const ConvergenceResult& result);
void write_rates_csv(const std::string& path,
                     const std::vector<std::pair<int, ConvergenceResult>>& by_order);
void write_dmp_csv(const std::string& path, const DmpReport& report);
void write_iterations_csv(const std::string& path,
                          const std::vector<SolveResult>& per_slab);
void write_profile_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& samples);

}  // namespace stiga
