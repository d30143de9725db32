#include "stiga/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "stiga/quadrature.hpp"

namespace stiga {

namespace {

// Per-direction tables of basis values and first derivatives at the mapped
// Gauss points of every knot span.
struct AxisTable {
    int spans = 0;
    int nq = 0;      // points per span
    int nb = 0;      // active functions per span (p + 1)
    std::vector<double> x;    // [span * nq + q]
    std::vector<double> w;    // scaled weights
    std::vector<double> val;  // [(span * nq + q) * nb + l]
    std::vector<double> der;
};

AxisTable build_axis_table(const KnotVector& kv, int nq) {
    AxisTable t;
    t.spans = kv.spans();
    t.nq = nq;
    t.nb = kv.degree() + 1;
    t.x.resize(t.spans * nq);
    t.w.resize(t.spans * nq);
    t.val.resize(t.spans * nq * t.nb);
    t.der.resize(t.spans * nq * t.nb);

    const GaussRule& rule = gauss_legendre(nq);
    const double h = kv.span_width();
    std::vector<double> ders(2 * t.nb);
    for (int s = 0; s < t.spans; ++s) {
        const double a = kv.x_min() + s * h;
        for (int q = 0; q < nq; ++q) {
            const int row = s * nq + q;
            t.x[row] = a + 0.5 * h * (rule.points[q] + 1.0);
            t.w[row] = 0.5 * h * rule.weights[q];
            kv.eval_span_derivatives(t.x[row], 1, ders.data());
            for (int l = 0; l < t.nb; ++l) {
                t.val[row * t.nb + l] = ders[l];
                t.der[row * t.nb + l] = ders[t.nb + l];
            }
        }
    }
    return t;
}

}  // namespace

SystemMatrix assemble_galerkin(const TensorSpace& space, const ProblemData& problem,
                               int points_per_span) {
    if (problem.mu < 0.0) {
        throw std::invalid_argument("assemble_galerkin: mu must be nonnegative");
    }
    const int nd = space.ndim();
    const int p = space.degree();
    const int nq = (points_per_span > 0) ? points_per_span : p + 1;
    const int d = space.spatial_dims();

    std::vector<AxisTable> tables;
    tables.reserve(nd);
    for (int a = 0; a < nd; ++a) tables.push_back(build_axis_table(space.axis(a), nq));

    SystemMatrix sys;
    auto pattern = std::make_shared<StencilPattern>(space, p);
    sys.K = StencilMatrix(pattern);
    sys.F = Eigen::VectorXd::Zero(space.total_points());

    const int nb = p + 1;
    int nloc = 1;
    for (int a = 0; a < nd; ++a) nloc *= nb;
    std::vector<double> loc_val(nloc);
    std::vector<std::array<double, kMaxDims>> loc_grad(nloc);
    std::vector<double> local(static_cast<std::size_t>(nloc) * nloc);
    std::vector<double> local_f(nloc);
    std::vector<std::int64_t> global(nloc);

    std::array<int, kMaxDims> span{0, 0, 0};
    std::array<int, kMaxDims> nspans{1, 1, 1};
    for (int a = 0; a < nd; ++a) nspans[a] = tables[a].spans;

    while (true) {
        std::fill(local.begin(), local.end(), 0.0);
        std::fill(local_f.begin(), local_f.end(), 0.0);

        // Global flat index of each local function on this element.
        for (int l = 0; l < nloc; ++l) {
            int rem = l;
            MultiIndex gi{0, 0, 0};
            for (int a = 0; a < nd; ++a) {
                gi[a] = span[a] + rem % nb;
                rem /= nb;
            }
            global[l] = space.flatten(gi);
        }

        std::array<int, kMaxDims> qp{0, 0, 0};
        while (true) {
            Point x{0.0, 0.0, 0.0};
            double weight = 1.0;
            for (int a = 0; a < nd; ++a) {
                const int row = span[a] * tables[a].nq + qp[a];
                x[a] = tables[a].x[row];
                weight *= tables[a].w[row];
            }
            // Tensor products of 1D values and derivatives.
            for (int l = 0; l < nloc; ++l) {
                int rem = l;
                double v = 1.0;
                std::array<double, kMaxDims> g{1.0, 1.0, 1.0};
                for (int a = 0; a < nd; ++a) {
                    const int la = rem % nb;
                    rem /= nb;
                    const int row = span[a] * tables[a].nq + qp[a];
                    const double ba = tables[a].val[row * nb + la];
                    const double da = tables[a].der[row * nb + la];
                    v *= ba;
                    for (int b = 0; b < nd; ++b) g[b] *= (b == a) ? da : ba;
                }
                loc_val[l] = v;
                loc_grad[l] = g;
            }

            const SpatialPoint xs = space.spatial_part(x);
            const double t = space.time_part(x);
            const Velocity beta = problem.beta_at(xs);
            double bnorm = 0.0;
            std::array<double, kMaxDims> vel{0.0, 0.0, 0.0};
            for (int a = 0; a < d; ++a) {
                vel[a] = beta[a];
                bnorm += beta[a] * beta[a];
            }
            if (space.transient()) vel[nd - 1] = 1.0;
            sys.beta_max = std::max(sys.beta_max, std::sqrt(bnorm));
            const double g_val = problem.source_at(xs, t);

            for (int trial = 0; trial < nloc; ++trial) {
                double conv = 0.0;
                for (int a = 0; a < nd; ++a) conv += vel[a] * loc_grad[trial][a];
                const double wc = weight * conv;
                double* row = local.data() + static_cast<std::size_t>(trial);
                for (int test = 0; test < nloc; ++test) {
                    double diff = 0.0;
                    for (int a = 0; a < d; ++a) {
                        diff += loc_grad[trial][a] * loc_grad[test][a];
                    }
                    row[static_cast<std::size_t>(test) * nloc] +=
                        wc * loc_val[test] + weight * problem.mu * diff;
                }
            }
            for (int test = 0; test < nloc; ++test) {
                local_f[test] += weight * g_val * loc_val[test];
            }

            int a = 0;
            while (a < nd) {
                if (++qp[a] < nq) break;
                qp[a] = 0;
                ++a;
            }
            if (a == nd) break;
        }

        const StencilPattern& pat = sys.K.pattern();
        auto& vals = sys.K.values();
        for (int test = 0; test < nloc; ++test) {
            const std::int64_t gi = global[test];
            sys.F[gi] += local_f[test];
            for (int trial = 0; trial < nloc; ++trial) {
                vals[pat.pos(gi, global[trial])] +=
                    local[static_cast<std::size_t>(test) * nloc + trial];
            }
        }

        int a = 0;
        while (a < nd) {
            if (++span[a] < nspans[a]) break;
            span[a] = 0;
            ++a;
        }
        if (a == nd) break;
    }
    return sys;
}

Eigen::VectorXd assemble_load(const TensorSpace& space, const ProblemData& problem,
                              int points_per_span) {
    const std::int64_t n = space.total_points();
    if (!problem.source) return Eigen::VectorXd::Zero(n);

    const int nd = space.ndim();
    const int p = space.degree();
    const int nq = (points_per_span > 0) ? points_per_span : p + 1;
    const int nb = p + 1;

    std::vector<AxisTable> tables;
    tables.reserve(nd);
    for (int a = 0; a < nd; ++a) tables.push_back(build_axis_table(space.axis(a), nq));

    Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
    int nloc = 1;
    for (int a = 0; a < nd; ++a) nloc *= nb;

    std::array<int, kMaxDims> span{0, 0, 0};
    std::array<int, kMaxDims> nspans{1, 1, 1};
    for (int a = 0; a < nd; ++a) nspans[a] = tables[a].spans;
    while (true) {
        std::array<int, kMaxDims> qp{0, 0, 0};
        while (true) {
            Point x{0.0, 0.0, 0.0};
            double weight = 1.0;
            for (int a = 0; a < nd; ++a) {
                const int row = span[a] * tables[a].nq + qp[a];
                x[a] = tables[a].x[row];
                weight *= tables[a].w[row];
            }
            const double g_val =
                problem.source_at(space.spatial_part(x), space.time_part(x));
            if (g_val != 0.0) {
                for (int l = 0; l < nloc; ++l) {
                    int rem = l;
                    double v = 1.0;
                    MultiIndex gi{0, 0, 0};
                    for (int a = 0; a < nd; ++a) {
                        const int la = rem % nb;
                        rem /= nb;
                        gi[a] = span[a] + la;
                        const int row = span[a] * tables[a].nq + qp[a];
                        v *= tables[a].val[row * nb + la];
                    }
                    F[space.flatten(gi)] += weight * g_val * v;
                }
            }
            int a = 0;
            while (a < nd) {
                if (++qp[a] < nq) break;
                qp[a] = 0;
                ++a;
            }
            if (a == nd) break;
        }
        int a = 0;
        while (a < nd) {
            if (++span[a] < nspans[a]) break;
            span[a] = 0;
            ++a;
        }
        if (a == nd) break;
    }
    return F;
}

Eigen::VectorXd Constraints::merge(const Eigen::VectorXd& free_values) const {
    Eigen::VectorXd full = values;
    for (std::int64_t f = 0; f < n_free(); ++f) full[free_list[f]] = free_values[f];
    return full;
}

Eigen::VectorXd Constraints::restrict_free(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(n_free());
    for (std::int64_t f = 0; f < n_free(); ++f) out[f] = full[free_list[f]];
    return out;
}

Constraints make_constraints(const TensorSpace& space, const ProblemData& problem) {
    Constraints c;
    c.labels = space.classify_boundary(problem);
    const std::int64_t n = space.total_points();
    c.values = Eigen::VectorXd::Zero(n);
    c.full_to_free.assign(n, -1);
    bool any = false;
    for (std::int64_t i = 0; i < n; ++i) {
        const MultiIndex mi = space.unflatten(i);
        const Point x = space.greville_point(mi);
        const SpatialPoint xs = space.spatial_part(x);
        switch (c.labels[i]) {
            case PointClass::initial:
                c.values[i] = problem.initial_at(xs);
                break;
            case PointClass::dirichlet:
                c.values[i] = problem.dirichlet_at(xs, space.time_part(x));
                break;
            case PointClass::free_point:
                c.full_to_free[i] = static_cast<std::int64_t>(c.free_list.size());
                c.free_list.push_back(i);
                continue;
        }
        if (!any) {
            c.data_min = c.data_max = c.values[i];
            any = true;
        } else {
            c.data_min = std::min(c.data_min, c.values[i]);
            c.data_max = std::max(c.data_max, c.values[i]);
        }
    }
    return c;
}

ReducedSystem apply_constraints(const StencilMatrix& A, const Eigen::VectorXd& F,
                                const Constraints& constraints) {
    const std::int64_t nf = constraints.n_free();
    ReducedSystem red;
    red.b = Eigen::VectorXd(nf);
    for (std::int64_t f = 0; f < nf; ++f) red.b[f] = F[constraints.free_list[f]];

    const auto& outer = A.pattern().outer();
    const auto& inner = A.pattern().inner();
    const auto& vals = A.values();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(outer[A.rows()]) * nf / std::max<std::int64_t>(A.rows(), 1));
    for (std::int64_t f = 0; f < nf; ++f) {
        const std::int64_t i = constraints.free_list[f];
        for (std::int64_t k = outer[i]; k < outer[i + 1]; ++k) {
            const std::int64_t j = inner[k];
            const std::int64_t fj = constraints.full_to_free[j];
            if (fj >= 0) {
                trips.emplace_back(static_cast<int>(f), static_cast<int>(fj), vals[k]);
            } else {
                red.b[f] -= vals[k] * constraints.values[j];
            }
        }
    }
    red.A.resize(nf, nf);
    red.A.setFromTriplets(trips.begin(), trips.end());
    red.A.makeCompressed();
    return red;
}

double SplineField::value(const Point& x) const {
    const int nd = space_->ndim();
    const int nb = space_->degree() + 1;
    double vals[kMaxDims][16];
    int first[kMaxDims];
    for (int a = 0; a < nd; ++a) {
        first[a] = space_->axis(a).eval_span(x[a], vals[a]);
    }
    double sum = 0.0;
    int nloc = 1;
    for (int a = 0; a < nd; ++a) nloc *= nb;
    for (int l = 0; l < nloc; ++l) {
        int rem = l;
        double v = 1.0;
        MultiIndex gi{0, 0, 0};
        for (int a = 0; a < nd; ++a) {
            const int la = rem % nb;
            rem /= nb;
            gi[a] = first[a] + la;
            v *= vals[a][la];
        }
        sum += v * (*coeffs_)[space_->flatten(gi)];
    }
    return sum;
}

Point SplineField::gradient(const Point& x) const {
    const int nd = space_->ndim();
    const int nb = space_->degree() + 1;
    double vals[kMaxDims][16];
    double ders[kMaxDims][16];
    int first[kMaxDims];
    std::vector<double> buf(2 * nb);
    for (int a = 0; a < nd; ++a) {
        first[a] = space_->axis(a).eval_span_derivatives(x[a], 1, buf.data());
        for (int l = 0; l < nb; ++l) {
            vals[a][l] = buf[l];
            ders[a][l] = buf[nb + l];
        }
    }
    Point g{0.0, 0.0, 0.0};
    int nloc = 1;
    for (int a = 0; a < nd; ++a) nloc *= nb;
    for (int l = 0; l < nloc; ++l) {
        int rem = l;
        MultiIndex gi{0, 0, 0};
        std::array<double, kMaxDims> term{1.0, 1.0, 1.0};
        for (int a = 0; a < nd; ++a) {
            const int la = rem % nb;
            rem /= nb;
            gi[a] = first[a] + la;
            for (int b = 0; b < nd; ++b) {
                term[b] *= (b == a) ? ders[a][la] : vals[a][la];
            }
        }
        const double c = (*coeffs_)[space_->flatten(gi)];
        for (int b = 0; b < nd; ++b) g[b] += c * term[b];
    }
    return g;
}

void ErrorIntegrals::accumulate(const ErrorIntegrals& other) {
    err_l2_sq += other.err_l2_sq;
    err_h1_sq += other.err_h1_sq;
    exact_l2_sq += other.exact_l2_sq;
    exact_h1_sq += other.exact_h1_sq;
}

ErrorNorms ErrorIntegrals::finalize() const {
    ErrorNorms n;
    if (exact_l2_sq > 0.0) {
        n.l2 = std::sqrt(err_l2_sq / exact_l2_sq);
    } else {
        n.l2 = std::sqrt(err_l2_sq);
        n.absolute = true;
    }
    if (exact_h1_sq > 0.0) {
        n.h1_semi = std::sqrt(err_h1_sq / exact_h1_sq);
    } else {
        n.h1_semi = std::sqrt(err_h1_sq);
        n.absolute = true;
    }
    return n;
}

ErrorIntegrals error_integrals(const TensorSpace& space, const Eigen::VectorXd& coeffs,
                               const ScalarFn& exact, const GradientFn& exact_gradient,
                               int points_per_span) {
    if (!exact) {
        throw std::invalid_argument("error_integrals: exact solution required");
    }
    const int nd = space.ndim();
    const int p = space.degree();
    const int nq = (points_per_span > 0) ? points_per_span : p + 1;
    const int nb = p + 1;

    std::vector<AxisTable> tables;
    tables.reserve(nd);
    for (int a = 0; a < nd; ++a) tables.push_back(build_axis_table(space.axis(a), nq));

    auto exact_grad_at = [&](const SpatialPoint& xs, double t) {
        if (exact_gradient) return exact_gradient(xs, t);
        // Central differences as a fallback oracle.
        const double dh = 1e-6;
        std::array<double, 3> g{0.0, 0.0, 0.0};
        for (int a = 0; a < space.spatial_dims(); ++a) {
            SpatialPoint xp = xs;
            SpatialPoint xm = xs;
            xp[a] += dh;
            xm[a] -= dh;
            g[a] = (exact(xp, t) - exact(xm, t)) / (2 * dh);
        }
        if (space.transient()) {
            g[2] = (exact(xs, t + dh) - exact(xs, t - dh)) / (2 * dh);
        }
        return g;
    };

    ErrorIntegrals out;
    int nloc = 1;
    for (int a = 0; a < nd; ++a) nloc *= nb;

    std::array<int, kMaxDims> span{0, 0, 0};
    std::array<int, kMaxDims> nspans{1, 1, 1};
    for (int a = 0; a < nd; ++a) nspans[a] = tables[a].spans;
    while (true) {
        std::array<int, kMaxDims> qp{0, 0, 0};
        while (true) {
            Point x{0.0, 0.0, 0.0};
            double weight = 1.0;
            for (int a = 0; a < nd; ++a) {
                const int row = span[a] * tables[a].nq + qp[a];
                x[a] = tables[a].x[row];
                weight *= tables[a].w[row];
            }
            double uh = 0.0;
            Point gh{0.0, 0.0, 0.0};
            for (int l = 0; l < nloc; ++l) {
                int rem = l;
                double v = 1.0;
                std::array<double, kMaxDims> g{1.0, 1.0, 1.0};
                MultiIndex gi{0, 0, 0};
                for (int a = 0; a < nd; ++a) {
                    const int la = rem % nb;
                    rem /= nb;
                    gi[a] = span[a] + la;
                    const int row = span[a] * tables[a].nq + qp[a];
                    const double ba = tables[a].val[row * nb + la];
                    const double da = tables[a].der[row * nb + la];
                    v *= ba;
                    for (int b = 0; b < nd; ++b) g[b] *= (b == a) ? da : ba;
                }
                const double c = coeffs[space.flatten(gi)];
                uh += c * v;
                for (int b = 0; b < nd; ++b) gh[b] += c * g[b];
            }

            const SpatialPoint xs = space.spatial_part(x);
            const double t = space.time_part(x);
            const double ue = exact(xs, t);
            const auto ge3 = exact_grad_at(xs, t);
            Point ge{0.0, 0.0, 0.0};
            for (int a = 0; a < space.spatial_dims(); ++a) ge[a] = ge3[a];
            if (space.transient()) ge[nd - 1] = ge3[2];

            out.err_l2_sq += weight * (uh - ue) * (uh - ue);
            out.exact_l2_sq += weight * ue * ue;
            for (int a = 0; a < nd; ++a) {
                out.err_h1_sq += weight * (gh[a] - ge[a]) * (gh[a] - ge[a]);
                out.exact_h1_sq += weight * ge[a] * ge[a];
            }

            int a = 0;
            while (a < nd) {
                if (++qp[a] < nq) break;
                qp[a] = 0;
                ++a;
            }
            if (a == nd) break;
        }
        int a = 0;
        while (a < nd) {
            if (++span[a] < nspans[a]) break;
            span[a] = 0;
            ++a;
        }
        if (a == nd) break;
    }
    return out;
}

ErrorNorms error_norms(const TensorSpace& space, const Eigen::VectorXd& coeffs,
                       const ScalarFn& exact, const GradientFn& exact_gradient,
                       int points_per_span) {
    return error_integrals(space, coeffs, exact, exact_gradient, points_per_span)
        .finalize();
}

}  // namespace stiga
