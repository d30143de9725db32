#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stiga/assembly.hpp"
#include "stiga/stencil_matrix.hpp"
#include "stiga/tensor_space.hpp"

namespace stiga {

/// Detector and regularization parameters.  The user-scale values sigma,
/// epsilon, gamma are rescaled to mesh units via scaled().
struct StabilizationParams {
    double q = 10.0;
    bool regularized = false;
    double sigma = 1e-6;
    double epsilon = 1e-8;
    double gamma = 1e-10;
    double length_ref = 0.0;  // 0 selects the largest domain extent

    struct Scaled {
        double q = 1.0;
        bool regularized = false;
        double sigma_h = 0.0;
        double eps_h = 0.0;
        double gamma_h = 0.0;
    };

    /// sigma_h = sigma |beta|^2 L^{2(d-3)} h^{2(p+1)},
    /// eps_h = epsilon L^{-4} h^2, gamma_h = gamma / L,
    /// with h the largest spatial knot spacing.
    Scaled scaled(const TensorSpace& space, double beta_max) const;
};

/// Smoothly limited ramp: 2x^4 - 5x^3 + 3x^2 + x below one, clamped to one
/// above; twice differentiable everywhere.
double smooth_limiter(double x);

/// Upper regularized absolute value sqrt(x^2 + eps).
double abs_upper(double x, double eps);
/// Lower regularized absolute value x^2 / sqrt(x^2 + eps).
double abs_lower(double x, double eps);

/// max_{sigma}(x, y) = sqrt((x-y)^2 + sigma)/2 + (x+y)/2; exact max at
/// sigma = 0, twice differentiable and >= max otherwise.
double smoothed_max(double x, double y, double sigma_h);

/// Precomputed symmetric-point geometry of every (point, direction) pair.
/// Pairs whose opposite index leaves the grid are marked unavailable and
/// are omitted from the detector sums.
class DetectorGeometry {
public:
    explicit DetectorGeometry(const TensorSpace& space);

    struct Pair {
        bool available = false;
        std::int64_t j = -1;
        double r_norm = 0.0;
        double r_sym_norm = 0.0;
        int count = 0;
        std::array<std::int64_t, 8> index{};
        std::array<double, 8> weight{};
    };

    const TensorSpace& space() const { return *space_; }
    int pairs_per_point() const { return npairs_; }
    const Pair& pair(std::int64_t i, int k) const { return pairs_[i * npairs_ + k]; }
    /// Pair slot for neighbor j of i, or -1.
    int pair_slot(const MultiIndex& i, const MultiIndex& j) const;
    /// True when no direction pair of i was omitted.
    bool full_stencil(std::int64_t i) const { return full_[i]; }

private:
    const TensorSpace* space_;
    int npairs_;
    std::vector<Pair> pairs_;
    std::vector<std::uint8_t> full_;
};

/// Jump and mean of the directional gradient approximations at point i in
/// the direction of neighbor j; empty when the pair is unavailable.
struct JumpMean {
    double jump = 0.0;
    double mean = 0.0;
};
std::optional<JumpMean> jump_and_mean(const DetectorGeometry& geom,
                                      const Eigen::VectorXd& u,
                                      const MultiIndex& i, const MultiIndex& j);

/// Shock detector value in [0, 1] at one point (plain or regularized).
double detector(const DetectorGeometry& geom, const Eigen::VectorXd& u,
                const MultiIndex& i, const StabilizationParams::Scaled& sp);

/// Detector at every control point.
Eigen::VectorXd detector_field(const DetectorGeometry& geom, const Eigen::VectorXd& u,
                               const StabilizationParams::Scaled& sp);

/// Pairwise artificial diffusion from detector values and Galerkin entries.
double artificial_diffusion(double alpha_i, double alpha_j, double k_ij, double k_ji,
                            const StabilizationParams::Scaled& sp);

/// Detector values, pairwise diffusions and the graph-Laplacian matrix for
/// one iterate.  B is symmetric, has zero row sums and nonpositive
/// off-diagonal entries supported inside the K stencil.
struct StabilizationState {
    Eigen::VectorXd alpha;
    StencilMatrix B;

    double nu(std::int64_t i, std::int64_t j) const {
        return (i == j) ? B.get(i, i) : -B.get(i, j);
    }
};

StabilizationState assemble_stabilization(const DetectorGeometry& geom,
                                          const StencilMatrix& K,
                                          const Eigen::VectorXd& u,
                                          const StabilizationParams::Scaled& sp);

/// Report of the discrete-maximum-principle audit of a solved state.
struct DmpReport {
    double free_min = 0.0;
    double free_max = 0.0;
    double data_min = 0.0;
    double data_max = 0.0;
    double violation = 0.0;       // how far free values leave the data range
    std::int64_t extrema_count = 0;
    std::int64_t theorem_violations = 0;  // extremum rows breaking the sign/row-sum condition
    std::vector<std::int64_t> extrema;

    std::string csv_header() const;
    std::string csv_row() const;
};

/// Bounds check of free control values against constrained data, local
/// extremum census, and (when the stabilized operator is given) the
/// structural check K~_ij <= tol off-diagonal / row sums ~ 0 at every free
/// extremum row.
DmpReport dmp_audit(const TensorSpace& space, const Eigen::VectorXd& u,
                    const Constraints& constraints,
                    const StencilMatrix* stabilized_operator = nullptr,
                    double tol = 1e-10);

}  // namespace stiga
