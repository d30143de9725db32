#pragma once

#include <vector>

namespace stiga {

/// Open knot vector of degree p on an interval, with uniform interior
/// spacing.  The first and last knots repeat p+1 times, so the boundary
/// basis functions are interpolatory.  Basis functions are indexed
/// 0..num_basis()-1.
class KnotVector {
public:
    /// Build from an explicit nondecreasing knot sequence.  Validates
    /// open-ness (p+1 fold end knots) and multiplicity <= p+1.
    KnotVector(std::vector<double> knots, int degree);

    /// Open uniform vector with `spans` nonzero intervals of width
    /// length/spans, starting at `origin`.
    static KnotVector open_uniform(double length, int spans, int degree,
                                   double origin = 0.0);

    int degree() const noexcept { return degree_; }
    int spans() const noexcept { return spans_; }
    int num_basis() const noexcept { return spans_ + degree_; }
    double x_min() const noexcept { return knots_.front(); }
    double x_max() const noexcept { return knots_.back(); }
    double length() const noexcept { return x_max() - x_min(); }
    /// Width of one knot span (interior spacing is uniform by construction).
    double span_width() const noexcept { return length() / spans_; }
    const std::vector<double>& knots() const noexcept { return knots_; }

    /// Knot-array index k of the nonzero span with knots[k] <= x < knots[k+1];
    /// x == x_max() maps to the last nonzero span (closed right endpoint).
    int find_span(double x) const;

    /// Values of the p+1 basis functions that are nonzero on the span of x.
    /// Writes values[0..p] = B_{first..first+p}(x) and returns `first`.
    int eval_span(double x, double* values) const;

    /// Values and derivatives up to `order` of the p+1 active functions.
    /// ders is indexed [k * (p+1) + local] for k = 0..order.
    int eval_span_derivatives(double x, int order, double* ders) const;

    /// B_i^p(x).  Throws std::invalid_argument for i or x out of range.
    double basis(int i, double x) const;

    /// d^order/dx^order B_i^p(x), order in {1, 2}, order <= p.
    double basis_derivative(int i, double x, int order) const;

    /// Greville abscissa of basis i: average of p consecutive interior knots.
    double greville(int i) const;
    std::vector<double> greville_all() const;

private:
    std::vector<double> knots_;
    int degree_ = 1;
    int spans_ = 0;

    void check_x(double x) const;
};

/// Degree elevation calibrated so that the number of basis functions grows
/// like the node count of a Lagrangian mesh: starting from `spans_base`
/// intervals at degree 1, the degree-p space uses (spans_base-1)*p + 1
/// spans and therefore spans_base*p + 1 basis functions.
KnotVector k_refine(int spans_base, int degree_target, double length = 1.0,
                    double origin = 0.0);

/// Span count used by k_refine.
int k_refined_spans(int spans_base, int degree_target);

}  // namespace stiga
