#include "stiga/tensor_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stiga {

TensorSpace::TensorSpace(std::vector<KnotVector> axes, bool transient)
    : axes_(std::move(axes)), transient_(transient) {
    ndim_ = static_cast<int>(axes_.size());
    if (ndim_ < 1 || ndim_ > kMaxDims) {
        throw std::invalid_argument("TensorSpace: 1 to 3 directions supported");
    }
    if (transient_ && ndim_ < 2) {
        throw std::invalid_argument("TensorSpace: transient space needs a time direction");
    }
    degree_ = axes_[0].degree();
    total_ = 1;
    for (int a = 0; a < ndim_; ++a) {
        if (axes_[a].degree() != degree_) {
            throw std::invalid_argument("TensorSpace: all directions share one degree");
        }
        sizes_[a] = axes_[a].num_basis();
        total_ *= sizes_[a];
        greville_[a] = axes_[a].greville_all();
    }
}

std::int64_t TensorSpace::flatten(const MultiIndex& i) const noexcept {
    std::int64_t flat = 0;
    for (int a = ndim_ - 1; a >= 0; --a) flat = flat * sizes_[a] + i[a];
    return flat;
}

MultiIndex TensorSpace::unflatten(std::int64_t flat) const noexcept {
    MultiIndex i{0, 0, 0};
    for (int a = 0; a < ndim_; ++a) {
        i[a] = static_cast<int>(flat % sizes_[a]);
        flat /= sizes_[a];
    }
    return i;
}

bool TensorSpace::valid(const MultiIndex& i) const noexcept {
    for (int a = 0; a < ndim_; ++a) {
        if (i[a] < 0 || i[a] >= sizes_[a]) return false;
    }
    return true;
}

std::vector<MultiIndex> TensorSpace::box(const MultiIndex& i, int reach) const {
    if (!valid(i)) {
        throw std::invalid_argument("TensorSpace: index out of range");
    }
    MultiIndex lo{0, 0, 0};
    MultiIndex hi{0, 0, 0};
    std::int64_t count = 1;
    for (int a = 0; a < ndim_; ++a) {
        lo[a] = std::max(0, i[a] - reach);
        hi[a] = std::min(sizes_[a] - 1, i[a] + reach);
        count *= hi[a] - lo[a] + 1;
    }
    std::vector<MultiIndex> out;
    out.reserve(count);
    MultiIndex j = lo;
    while (true) {
        out.push_back(j);
        int a = 0;
        while (a < ndim_) {
            if (++j[a] <= hi[a]) break;
            j[a] = lo[a];
            ++a;
        }
        if (a == ndim_) break;
    }
    return out;
}

std::vector<MultiIndex> TensorSpace::neighbors(const MultiIndex& i) const {
    return box(i, 1);
}

std::vector<MultiIndex> TensorSpace::support_set(const MultiIndex& i) const {
    return box(i, degree_);
}

Point TensorSpace::greville_point(const MultiIndex& i) const {
    if (!valid(i)) {
        throw std::invalid_argument("TensorSpace: index out of range");
    }
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < ndim_; ++a) x[a] = greville_[a][i[a]];
    return x;
}

SymmetricPoint TensorSpace::symmetric_point(const MultiIndex& i,
                                            const MultiIndex& j) const {
    if (!valid(i) || !valid(j)) {
        throw std::invalid_argument("symmetric_point: index out of range");
    }
    MultiIndex delta{0, 0, 0};
    bool proper = false;
    for (int a = 0; a < ndim_; ++a) {
        delta[a] = j[a] - i[a];
        if (std::abs(delta[a]) > 1) {
            throw std::invalid_argument("symmetric_point: j must be a neighbor of i");
        }
        if (delta[a] != 0) proper = true;
    }
    if (!proper) {
        throw std::invalid_argument("symmetric_point: j must differ from i");
    }

    SymmetricPoint sym;
    // The exit facet interpolates between index i_a and i_a - delta_a in
    // every direction j differs from i; all of those must exist.
    for (int a = 0; a < ndim_; ++a) {
        const int opp = i[a] - delta[a];
        if (opp < 0 || opp >= sizes_[a]) return sym;  // unavailable
    }

    const Point xi = greville_point(i);
    const Point xj = greville_point(j);
    double u[kMaxDims] = {0.0, 0.0, 0.0};  // ray direction x_i - x_j
    double r2 = 0.0;
    for (int a = 0; a < ndim_; ++a) {
        u[a] = xi[a] - xj[a];
        r2 += u[a] * u[a];
    }
    sym.r_norm = std::sqrt(r2);

    // Smallest parameter at which a moving coordinate reaches the box side
    // x_{a, i_a - delta_a}.
    double s_exit = std::numeric_limits<double>::infinity();
    for (int a = 0; a < ndim_; ++a) {
        if (delta[a] == 0) continue;
        const double t = (greville_[a][i[a] - delta[a]] - xi[a]) / u[a];
        s_exit = std::min(s_exit, t);
    }

    Point xs{0.0, 0.0, 0.0};
    double rs2 = 0.0;
    for (int a = 0; a < ndim_; ++a) {
        xs[a] = xi[a] + s_exit * u[a];
        const double da = xs[a] - xi[a];
        rs2 += da * da;
    }
    sym.x = xs;
    sym.r_sym_norm = std::sqrt(rs2);

    // Tensor-product linear interpolation between i_a and i_a - delta_a per
    // moving direction; stationary directions pin the index.
    int count = 1;
    int node_idx[kMaxDims][2];
    double node_w[kMaxDims][2];
    int node_n[kMaxDims];
    for (int a = 0; a < ndim_; ++a) {
        if (delta[a] == 0) {
            node_idx[a][0] = i[a];
            node_w[a][0] = 1.0;
            node_n[a] = 1;
        } else {
            const double xa = greville_[a][i[a]];
            const double xb = greville_[a][i[a] - delta[a]];
            const double wb = (xs[a] - xa) / (xb - xa);
            node_idx[a][0] = i[a];
            node_w[a][0] = 1.0 - wb;
            node_idx[a][1] = i[a] - delta[a];
            node_w[a][1] = wb;
            node_n[a] = 2;
        }
        count *= node_n[a];
    }
    sym.count = 0;
    int choice[kMaxDims] = {0, 0, 0};
    for (int c = 0; c < count; ++c) {
        MultiIndex node{0, 0, 0};
        double w = 1.0;
        for (int a = 0; a < ndim_; ++a) {
            node[a] = node_idx[a][choice[a]];
            w *= node_w[a][choice[a]];
        }
        sym.index[sym.count] = flatten(node);
        sym.weight[sym.count] = w;
        ++sym.count;
        for (int a = 0; a < ndim_; ++a) {
            if (++choice[a] < node_n[a]) break;
            choice[a] = 0;
        }
    }
    sym.available = true;
    return sym;
}

std::vector<PointClass> TensorSpace::classify_boundary(
    const ProblemData& problem) const {
    std::vector<PointClass> labels(total_, PointClass::free_point);
    const int d = spatial_dims();
    const int time_axis_id = transient_ ? ndim_ - 1 : -1;

    for (std::int64_t flat = 0; flat < total_; ++flat) {
        const MultiIndex i = unflatten(flat);
        if (transient_ && i[time_axis_id] == 0) {
            labels[flat] = PointClass::initial;
            continue;
        }
        bool dirichlet = false;
        for (int a = 0; a < d && !dirichlet; ++a) {
            for (int side = 0; side < 2 && !dirichlet; ++side) {
                const bool on_face =
                    (side == 0) ? (i[a] == 0) : (i[a] == sizes_[a] - 1);
                if (!on_face) continue;
                if (problem.mu > 0.0) {
                    dirichlet = true;
                } else {
                    const Point x = greville_point(i);
                    const Velocity b = problem.beta_at(spatial_part(x));
                    const double b_dot_n = (side == 0) ? -b[a] : b[a];
                    if (b_dot_n < 0.0) dirichlet = true;
                }
            }
        }
        if (dirichlet) labels[flat] = PointClass::dirichlet;
    }
    return labels;
}

}  // namespace stiga
