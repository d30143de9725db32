#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stiga/knots.hpp"
#include "stiga/problem.hpp"

namespace stiga {

inline constexpr int kMaxDims = 3;

/// Multi-index into the tensor-product basis; only the first ndim components
/// are meaningful.  The temporal index, when present, is the last one.
using MultiIndex = std::array<int, kMaxDims>;
using Point = std::array<double, kMaxDims>;

enum class PointClass : std::uint8_t { free_point, dirichlet, initial };

/// Symmetric counterpart of a neighbor j as seen from i: the exit point of
/// the ray from x_j through x_i on the boundary of the neighbor box of i,
/// together with the interpolation stencil on the exit facet.
struct SymmetricPoint {
    bool available = false;
    Point x{};                      // exit point
    double r_norm = 0.0;            // |x_j - x_i|
    double r_sym_norm = 0.0;        // |x_sym - x_i|
    int count = 0;                  // stencil size
    std::array<std::int64_t, 8> index{};  // flat stencil indices
    std::array<double, 8> weight{};       // nonnegative, sum to 1
};

/// Tensor product of per-direction spline spaces sharing one degree.  When
/// `transient` the last direction is time; a steady space has no time
/// direction at all.
class TensorSpace {
public:
    TensorSpace(std::vector<KnotVector> axes, bool transient);

    int ndim() const noexcept { return ndim_; }
    int spatial_dims() const noexcept { return transient_ ? ndim_ - 1 : ndim_; }
    bool transient() const noexcept { return transient_; }
    int degree() const noexcept { return degree_; }
    const KnotVector& axis(int a) const { return axes_[a]; }
    const KnotVector& time_axis() const { return axes_[ndim_ - 1]; }

    /// Basis count along direction a.
    int size(int a) const noexcept { return sizes_[a]; }
    std::int64_t total_points() const noexcept { return total_; }

    /// Lexicographic flattening, first direction fastest, time slowest.
    std::int64_t flatten(const MultiIndex& i) const noexcept;
    MultiIndex unflatten(std::int64_t flat) const noexcept;
    bool valid(const MultiIndex& i) const noexcept;

    /// All j with |i - j|_inf <= 1 (including i itself).
    std::vector<MultiIndex> neighbors(const MultiIndex& i) const;
    /// All j with |i - j|_inf <= p (including i itself).
    std::vector<MultiIndex> support_set(const MultiIndex& i) const;

    Point greville_point(const MultiIndex& i) const;
    double greville(int a, int idx) const { return greville_[a][idx]; }

    /// Symmetric point of neighbor j with respect to i.  Unavailable when
    /// the opposite index i - (j - i) leaves the grid; callers omit the
    /// direction pair in that case.  Throws if j is not a proper neighbor.
    SymmetricPoint symmetric_point(const MultiIndex& i, const MultiIndex& j) const;

    /// Label every control point: initial layer (transient only), Dirichlet
    /// on the spatial boundary (inflow only when mu = 0), or free.
    std::vector<PointClass> classify_boundary(const ProblemData& problem) const;

    SpatialPoint spatial_part(const Point& x) const {
        SpatialPoint s{0.0, 0.0};
        for (int a = 0; a < spatial_dims(); ++a) s[a] = x[a];
        return s;
    }
    double time_part(const Point& x) const {
        return transient_ ? x[ndim_ - 1] : 0.0;
    }

private:
    std::vector<KnotVector> axes_;
    bool transient_;
    int ndim_;
    int degree_;
    std::array<int, kMaxDims> sizes_{};
    std::int64_t total_;
    std::array<std::vector<double>, kMaxDims> greville_;

    std::vector<MultiIndex> box(const MultiIndex& i, int reach) const;
};

}  // namespace stiga
