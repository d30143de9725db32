#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "stiga/tensor_space.hpp"

namespace stiga {

/// Sparsity pattern of a tensor-grid operator whose row i couples every
/// column j with |i - j|_inf <= reach.  Column positions inside a row are
/// computed arithmetically, so entries can be addressed without search.
class StencilPattern {
public:
    StencilPattern(const TensorSpace& space, int reach);

    std::int64_t rows() const noexcept { return rows_; }
    std::int64_t nonzeros() const noexcept {
        return static_cast<std::int64_t>(inner_.size());
    }
    int reach() const noexcept { return reach_; }

    /// Storage slot of entry (i, j); -1 when j is outside the stencil of i.
    std::int64_t pos(std::int64_t i, std::int64_t j) const noexcept;

    const std::vector<std::int64_t>& outer() const noexcept { return outer_; }
    const std::vector<int>& inner() const noexcept { return inner_; }

private:
    int reach_;
    int ndim_;
    std::array<int, kMaxDims> sizes_{};
    std::int64_t rows_;
    std::vector<std::int64_t> outer_;
    std::vector<int> inner_;
};

/// Square sparse matrix over a shared StencilPattern.
class StencilMatrix {
public:
    StencilMatrix() = default;
    explicit StencilMatrix(std::shared_ptr<const StencilPattern> pattern)
        : pattern_(std::move(pattern)),
          values_(pattern_->nonzeros(), 0.0) {}

    const StencilPattern& pattern() const { return *pattern_; }
    std::shared_ptr<const StencilPattern> pattern_ptr() const { return pattern_; }
    std::int64_t rows() const { return pattern_->rows(); }

    double& at(std::int64_t i, std::int64_t j) {
        return values_[pattern_->pos(i, j)];
    }
    double get(std::int64_t i, std::int64_t j) const {
        const std::int64_t p = pattern_->pos(i, j);
        return p < 0 ? 0.0 : values_[p];
    }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }
    void set_zero() { values_.assign(values_.size(), 0.0); }

    /// Read-only Eigen view (no copy).
    Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> view() const;

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;

    /// this + other over the identical pattern.
    StencilMatrix added(const StencilMatrix& other) const;

private:
    std::shared_ptr<const StencilPattern> pattern_;
    std::vector<double> values_;
    mutable std::vector<int> outer_int_;  // int-typed outer for the Eigen view
};

}  // namespace stiga
