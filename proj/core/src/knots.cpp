#include "stiga/knots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stiga {

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
    if (degree_ < 1) {
        throw std::invalid_argument("KnotVector: degree must be >= 1");
    }
    const int n = static_cast<int>(knots_.size());
    if (n < 2 * (degree_ + 1)) {
        throw std::invalid_argument("KnotVector: too few knots for degree");
    }
    for (int i = 0; i + 1 < n; ++i) {
        if (knots_[i] > knots_[i + 1]) {
            throw std::invalid_argument("KnotVector: knots must be nondecreasing");
        }
    }
    for (int i = 0; i <= degree_; ++i) {
        if (knots_[i] != knots_.front() || knots_[n - 1 - i] != knots_.back()) {
            throw std::invalid_argument(
                "KnotVector: first and last knots must repeat degree+1 times");
        }
    }
    int mult = 1;
    for (int i = 1; i < n; ++i) {
        mult = (knots_[i] == knots_[i - 1]) ? mult + 1 : 1;
        if (mult > degree_ + 1) {
            throw std::invalid_argument(
                "KnotVector: knot multiplicity exceeds degree+1");
        }
    }
    spans_ = 0;
    for (int i = 0; i + 1 < n; ++i) {
        if (knots_[i] < knots_[i + 1]) ++spans_;
    }
    if (spans_ < 1) {
        throw std::invalid_argument("KnotVector: no nonzero span");
    }
    if (n != spans_ + 2 * degree_ + 1) {
        throw std::invalid_argument(
            "KnotVector: interior knots must be simple (length = m + 2p + 1)");
    }
}

KnotVector KnotVector::open_uniform(double length, int spans, int degree,
                                    double origin) {
    if (!(length > 0.0)) {
        throw std::invalid_argument("open_uniform: length must be positive");
    }
    if (spans < 1) {
        throw std::invalid_argument("open_uniform: spans must be >= 1");
    }
    if (degree < 1) {
        throw std::invalid_argument("open_uniform: degree must be >= 1");
    }
    std::vector<double> knots(spans + 2 * degree + 1);
    const double h = length / spans;
    for (int i = 0; i < static_cast<int>(knots.size()); ++i) {
        const int interior = std::clamp(i - degree, 0, spans);
        knots[i] = (interior == spans) ? origin + length : origin + interior * h;
    }
    return KnotVector(std::move(knots), degree);
}

void KnotVector::check_x(double x) const {
    if (!(x >= x_min() && x <= x_max())) {
        throw std::invalid_argument("KnotVector: x = " + std::to_string(x) +
                                    " outside [" + std::to_string(x_min()) +
                                    ", " + std::to_string(x_max()) + "]");
    }
}

int KnotVector::find_span(double x) const {
    check_x(x);
    const int p = degree_;
    int k = p + std::clamp(static_cast<int>((x - x_min()) / span_width()), 0,
                           spans_ - 1);
    while (k > p && x < knots_[k]) --k;
    while (k < p + spans_ - 1 && x >= knots_[k + 1]) ++k;
    return k;
}

namespace {

// Triangular evaluation of the degree-q basis functions that are nonzero on
// span k; 0/0 terms in the recursion are taken as 0.  values[0..q] holds
// B_{k-q}..B_k.
void span_values(const std::vector<double>& knots, int k, int q, double x,
                 double* values) {
    values[0] = 1.0;
    double left[16];
    double right[16];
    for (int j = 1; j <= q; ++j) {
        left[j] = x - knots[k + 1 - j];
        right[j] = knots[k + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double den = right[r + 1] + left[j - r];
            const double temp = (den != 0.0) ? values[r] / den : 0.0;
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
}

}  // namespace

int KnotVector::eval_span(double x, double* values) const {
    const int k = find_span(x);
    span_values(knots_, k, degree_, x, values);
    return k - degree_;
}

int KnotVector::eval_span_derivatives(double x, int order, double* ders) const {
    const int p = degree_;
    if (order < 0 || order > p) {
        throw std::invalid_argument("eval_span_derivatives: order must be in [0, degree]");
    }
    const int k = find_span(x);
    const int n = p + 1;

    // Order-0 row: plain degree-p values.
    span_values(knots_, k, p, x, ders);

    // Order s derivatives of degree-q functions are lifted from order s-1
    // derivatives of degree q-1 via the standard difference formula.
    double work[16];
    for (int s = 1; s <= order; ++s) {
        const int q0 = p - s;  // start from degree-q0 values
        span_values(knots_, k, q0, x, work);
        // work holds row for functions k-q0..k; lift s times.
        for (int lift = 1; lift <= s; ++lift) {
            const int q = q0 + lift;
            double next[16];
            for (int r = 0; r <= q; ++r) {
                const int i = k - q + r;  // global function index
                auto inv_gap = [&](int fn) {
                    const double den = knots_[fn + q] - knots_[fn];
                    return (den != 0.0) ? 1.0 / den : 0.0;
                };
                const double lo = (r >= 1) ? work[r - 1] : 0.0;
                const double hi = (r <= q - 1) ? work[r] : 0.0;
                next[r] = q * (lo * inv_gap(i) - hi * inv_gap(i + 1));
            }
            std::copy(next, next + q + 1, work);
        }
        std::copy(work, work + n, ders + s * n);
    }
    return k - p;
}

double KnotVector::basis(int i, double x) const {
    if (i < 0 || i >= num_basis()) {
        throw std::invalid_argument("basis: index out of range");
    }
    double values[16];
    const int first = eval_span(x, values);
    if (i < first || i > first + degree_) return 0.0;
    return values[i - first];
}

double KnotVector::basis_derivative(int i, double x, int order) const {
    if (i < 0 || i >= num_basis()) {
        throw std::invalid_argument("basis_derivative: index out of range");
    }
    if (order < 1 || order > 2) {
        throw std::invalid_argument("basis_derivative: order must be 1 or 2");
    }
    if (order > degree_) {
        throw std::invalid_argument("basis_derivative: order exceeds degree");
    }
    double ders[3 * 16];
    const int first = eval_span_derivatives(x, order, ders);
    if (i < first || i > first + degree_) return 0.0;
    return ders[order * (degree_ + 1) + (i - first)];
}

double KnotVector::greville(int i) const {
    if (i < 0 || i >= num_basis()) {
        throw std::invalid_argument("greville: index out of range");
    }
    double sum = 0.0;
    for (int j = 1; j <= degree_; ++j) sum += knots_[i + j];
    return sum / degree_;
}

std::vector<double> KnotVector::greville_all() const {
    std::vector<double> xs(num_basis());
    for (int i = 0; i < num_basis(); ++i) xs[i] = greville(i);
    return xs;
}

int k_refined_spans(int spans_base, int degree_target) {
    if (spans_base < 1 || degree_target < 1) {
        throw std::invalid_argument("k_refine: inputs must be positive");
    }
    return (spans_base - 1) * degree_target + 1;
}

KnotVector k_refine(int spans_base, int degree_target, double length,
                    double origin) {
    return KnotVector::open_uniform(length, k_refined_spans(spans_base, degree_target),
                                    degree_target, origin);
}

}  // namespace stiga
