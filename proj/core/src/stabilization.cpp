#include "stiga/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stiga {

StabilizationParams::Scaled StabilizationParams::scaled(const TensorSpace& space,
                                                        double beta_max) const {
    if (q < 1.0) {
        throw std::invalid_argument("StabilizationParams: q must be >= 1");
    }
    double L = length_ref;
    if (L <= 0.0) {
        for (int a = 0; a < space.ndim(); ++a) L = std::max(L, space.axis(a).length());
    }
    double h = 0.0;
    for (int a = 0; a < space.spatial_dims(); ++a) {
        h = std::max(h, space.axis(a).span_width());
    }
    if (h == 0.0) h = space.axis(space.ndim() - 1).span_width();

    const int d = space.spatial_dims();
    const int p = space.degree();
    Scaled s;
    s.q = q;
    s.regularized = regularized;
    s.sigma_h = sigma * beta_max * beta_max * std::pow(L, 2 * (d - 3)) *
                std::pow(h, 2 * (p + 1));
    s.eps_h = epsilon * std::pow(L, -4) * h * h;
    s.gamma_h = gamma / L;
    if (regularized && s.gamma_h <= 0.0) {
        throw std::invalid_argument("StabilizationParams: gamma must be positive");
    }
    return s;
}

double smooth_limiter(double x) {
    if (x >= 1.0) return 1.0;
    return 2 * x * x * x * x - 5 * x * x * x + 3 * x * x + x;
}

double abs_upper(double x, double eps) { return std::sqrt(x * x + eps); }

double abs_lower(double x, double eps) {
    const double r = std::sqrt(x * x + eps);
    return (r > 0.0) ? x * x / r : 0.0;
}

double smoothed_max(double x, double y, double sigma_h) {
    return 0.5 * std::sqrt((x - y) * (x - y) + sigma_h) + 0.5 * (x + y);
}

DetectorGeometry::DetectorGeometry(const TensorSpace& space) : space_(&space) {
    const int nd = space.ndim();
    npairs_ = 1;
    for (int a = 0; a < nd; ++a) npairs_ *= 3;
    --npairs_;  // all neighbor offsets except zero

    const std::int64_t n = space.total_points();
    pairs_.resize(n * npairs_);
    full_.assign(n, 1);

    for (std::int64_t flat = 0; flat < n; ++flat) {
        const MultiIndex i = space.unflatten(flat);
        int slot = 0;
        MultiIndex delta{0, 0, 0};
        for (int a = 0; a < nd; ++a) delta[a] = -1;
        while (true) {
            bool zero = true;
            for (int a = 0; a < nd; ++a) zero = zero && delta[a] == 0;
            if (!zero) {
                Pair& pr = pairs_[flat * npairs_ + slot];
                MultiIndex j = i;
                bool j_ok = true;
                for (int a = 0; a < nd; ++a) {
                    j[a] += delta[a];
                    if (j[a] < 0 || j[a] >= space.size(a)) j_ok = false;
                }
                if (j_ok) {
                    const SymmetricPoint sp = space.symmetric_point(i, j);
                    if (sp.available) {
                        pr.available = true;
                        pr.j = space.flatten(j);
                        pr.r_norm = sp.r_norm;
                        pr.r_sym_norm = sp.r_sym_norm;
                        pr.count = sp.count;
                        pr.index = sp.index;
                        pr.weight = sp.weight;
                    } else {
                        full_[flat] = 0;
                    }
                } else {
                    full_[flat] = 0;
                }
                ++slot;
            }
            int a = 0;
            while (a < nd) {
                if (++delta[a] <= 1) break;
                delta[a] = -1;
                ++a;
            }
            if (a == nd) break;
        }
    }
}

int DetectorGeometry::pair_slot(const MultiIndex& i, const MultiIndex& j) const {
    const int nd = space_->ndim();
    int slot = 0;
    int stride = 1;
    bool zero = true;
    for (int a = 0; a < nd; ++a) {
        const int d = j[a] - i[a];
        if (d < -1 || d > 1) return -1;
        if (d != 0) zero = false;
        slot += stride * (d + 1);
        stride *= 3;
    }
    if (zero) return -1;
    // Slots skip the zero offset, which sits in the middle.
    const int zero_slot = (stride - 1) / 2;
    return (slot < zero_slot) ? slot : slot - 1;
}

std::optional<JumpMean> jump_and_mean(const DetectorGeometry& geom,
                                      const Eigen::VectorXd& u,
                                      const MultiIndex& i, const MultiIndex& j) {
    const int slot = geom.pair_slot(i, j);
    if (slot < 0) {
        throw std::invalid_argument("jump_and_mean: j must be a proper neighbor of i");
    }
    const std::int64_t fi = geom.space().flatten(i);
    const DetectorGeometry::Pair& pr = geom.pair(fi, slot);
    if (!pr.available) return std::nullopt;

    const double ui = u[fi];
    const double dj = (u[pr.j] - ui) / pr.r_norm;
    double usym = 0.0;
    for (int k = 0; k < pr.count; ++k) usym += pr.weight[k] * u[pr.index[k]];
    const double ds = (usym - ui) / pr.r_sym_norm;
    return JumpMean{dj + ds, 0.5 * (std::abs(dj) + std::abs(ds))};
}

namespace {

double detector_at(const DetectorGeometry& geom, const Eigen::VectorXd& u,
                   std::int64_t flat, const StabilizationParams::Scaled& sp) {
    const int np = geom.pairs_per_point();
    const double ui = u[flat];
    double jump_sum = 0.0;
    double mean_sum = 0.0;
    bool any = false;
    for (int k = 0; k < np; ++k) {
        const DetectorGeometry::Pair& pr = geom.pair(flat, k);
        if (!pr.available) continue;
        any = true;
        const double dj = (u[pr.j] - ui) / pr.r_norm;
        double usym = 0.0;
        for (int s = 0; s < pr.count; ++s) usym += pr.weight[s] * u[pr.index[s]];
        const double ds = (usym - ui) / pr.r_sym_norm;
        jump_sum += dj + ds;
        if (sp.regularized) {
            mean_sum += abs_lower(dj, sp.eps_h) + abs_lower(ds, sp.eps_h);
        } else {
            mean_sum += std::abs(dj) + std::abs(ds);
        }
    }
    if (!any) return 0.0;
    if (sp.regularized) {
        const double num = abs_upper(jump_sum, sp.eps_h) + sp.gamma_h;
        const double den = mean_sum + sp.gamma_h;
        return std::pow(smooth_limiter(num / den), sp.q);
    }
    if (mean_sum == 0.0) return 0.0;
    const double ratio = std::min(std::abs(jump_sum) / mean_sum, 1.0);
    return std::pow(ratio, sp.q);
}

}  // namespace

double detector(const DetectorGeometry& geom, const Eigen::VectorXd& u,
                const MultiIndex& i, const StabilizationParams::Scaled& sp) {
    return detector_at(geom, u, geom.space().flatten(i), sp);
}

Eigen::VectorXd detector_field(const DetectorGeometry& geom, const Eigen::VectorXd& u,
                               const StabilizationParams::Scaled& sp) {
    const std::int64_t n = geom.space().total_points();
    Eigen::VectorXd alpha(n);
    for (std::int64_t i = 0; i < n; ++i) alpha[i] = detector_at(geom, u, i, sp);
    return alpha;
}

double artificial_diffusion(double alpha_i, double alpha_j, double k_ij, double k_ji,
                            const StabilizationParams::Scaled& sp) {
    if (sp.regularized) {
        return smoothed_max(smoothed_max(alpha_i * k_ij, alpha_j * k_ji, sp.sigma_h),
                            0.0, sp.sigma_h);
    }
    return std::max({alpha_i * k_ij, 0.0, alpha_j * k_ji});
}

StabilizationState assemble_stabilization(const DetectorGeometry& geom,
                                          const StencilMatrix& K,
                                          const Eigen::VectorXd& u,
                                          const StabilizationParams::Scaled& sp) {
    const TensorSpace& space = geom.space();
    StabilizationState st;
    st.alpha = detector_field(geom, u, sp);
    st.B = StencilMatrix(K.pattern_ptr());

    const auto& outer = K.pattern().outer();
    const auto& inner = K.pattern().inner();
    const auto& kv = K.values();
    auto& bv = st.B.values();

    const std::int64_t n = space.total_points();
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t s = outer[i]; s < outer[i + 1]; ++s) {
            const std::int64_t j = inner[s];
            if (j <= i) continue;  // strict upper triangle; mirrored entry below
            const std::int64_t sji = K.pattern().pos(j, i);
            const double nu =
                artificial_diffusion(st.alpha[i], st.alpha[j], kv[s], kv[sji], sp);
            bv[s] = -nu;
            bv[sji] = -nu;
        }
    }
    // Diagonal closes the zero row sums.
    for (std::int64_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::int64_t s = outer[i]; s < outer[i + 1]; ++s) {
            if (inner[s] != i) sum += bv[s];
        }
        bv[K.pattern().pos(i, i)] = -sum;
    }
    return st;
}

std::string DmpReport::csv_header() const {
    return "min,max,violation,extrema_count,theorem1_violations";
}

std::string DmpReport::csv_row() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%lld,%lld", free_min, free_max,
                  violation, static_cast<long long>(extrema_count),
                  static_cast<long long>(theorem_violations));
    return buf;
}

DmpReport dmp_audit(const TensorSpace& space, const Eigen::VectorXd& u,
                    const Constraints& constraints,
                    const StencilMatrix* stabilized_operator, double tol) {
    DmpReport rep;
    rep.data_min = constraints.data_min;
    rep.data_max = constraints.data_max;

    bool first = true;
    const std::int64_t n = space.total_points();
    for (std::int64_t i = 0; i < n; ++i) {
        if (constraints.constrained(i)) continue;
        if (first) {
            rep.free_min = rep.free_max = u[i];
            first = false;
        } else {
            rep.free_min = std::min(rep.free_min, u[i]);
            rep.free_max = std::max(rep.free_max, u[i]);
        }
    }
    if (!first) {
        rep.violation = std::max(0.0, std::max(rep.data_min - rep.free_min,
                                               rep.free_max - rep.data_max));
    }

    for (std::int64_t i = 0; i < n; ++i) {
        if (constraints.constrained(i)) continue;
        const MultiIndex mi = space.unflatten(i);
        bool is_min = true;
        bool is_max = true;
        bool flat = true;
        for (const MultiIndex& j : space.neighbors(mi)) {
            const std::int64_t fj = space.flatten(j);
            if (fj == i) continue;
            if (u[fj] < u[i]) is_min = false;
            if (u[fj] > u[i]) is_max = false;
            if (u[fj] != u[i]) flat = false;
        }
        if (!(is_min || is_max)) continue;
        ++rep.extrema_count;
        rep.extrema.push_back(i);
        // A fully flat extremum equals all its neighbors and is bounded by
        // them outright; the detector has nothing to enforce there.
        if (flat) continue;

        if (stabilized_operator != nullptr) {
            const auto& outer = stabilized_operator->pattern().outer();
            const auto& inner = stabilized_operator->pattern().inner();
            const auto& vals = stabilized_operator->values();
            double row_sum = 0.0;
            bool bad = false;
            for (std::int64_t s = outer[i]; s < outer[i + 1]; ++s) {
                row_sum += vals[s];
                if (inner[s] != i && vals[s] > tol) bad = true;
            }
            if (std::abs(row_sum) > tol) bad = true;
            if (bad) ++rep.theorem_violations;
        }
    }
    return rep;
}

}  // namespace stiga
