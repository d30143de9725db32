#include "stiga/stencil_matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace stiga {

StencilPattern::StencilPattern(const TensorSpace& space, int reach)
    : reach_(reach), ndim_(space.ndim()), rows_(space.total_points()) {
    for (int a = 0; a < ndim_; ++a) sizes_[a] = space.size(a);

    outer_.resize(rows_ + 1);
    outer_[0] = 0;
    for (std::int64_t i = 0; i < rows_; ++i) {
        const MultiIndex mi = space.unflatten(i);
        std::int64_t width = 1;
        for (int a = 0; a < ndim_; ++a) {
            const int lo = std::max(0, mi[a] - reach_);
            const int hi = std::min(sizes_[a] - 1, mi[a] + reach_);
            width *= hi - lo + 1;
        }
        outer_[i + 1] = outer_[i] + width;
    }
    inner_.resize(outer_[rows_]);
    for (std::int64_t i = 0; i < rows_; ++i) {
        const MultiIndex mi = space.unflatten(i);
        MultiIndex lo{0, 0, 0};
        MultiIndex hi{0, 0, 0};
        for (int a = 0; a < ndim_; ++a) {
            lo[a] = std::max(0, mi[a] - reach_);
            hi[a] = std::min(sizes_[a] - 1, mi[a] + reach_);
        }
        std::int64_t slot = outer_[i];
        MultiIndex j = lo;
        while (true) {
            inner_[slot++] = static_cast<int>(space.flatten(j));
            int a = 0;
            while (a < ndim_) {
                if (++j[a] <= hi[a]) break;
                j[a] = lo[a];
                ++a;
            }
            if (a == ndim_) break;
        }
    }
}

std::int64_t StencilPattern::pos(std::int64_t i, std::int64_t j) const noexcept {
    std::int64_t offset = 0;
    std::int64_t stride = 1;
    std::int64_t ii = i;
    std::int64_t jj = j;
    for (int a = 0; a < ndim_; ++a) {
        const int ia = static_cast<int>(ii % sizes_[a]);
        const int ja = static_cast<int>(jj % sizes_[a]);
        ii /= sizes_[a];
        jj /= sizes_[a];
        const int lo = std::max(0, ia - reach_);
        const int hi = std::min(sizes_[a] - 1, ia + reach_);
        if (ja < lo || ja > hi) return -1;
        offset += stride * (ja - lo);
        stride *= hi - lo + 1;
    }
    return outer_[i] + offset;
}

Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>>
StencilMatrix::view() const {
    if (outer_int_.empty()) {
        const auto& outer = pattern_->outer();
        outer_int_.assign(outer.begin(), outer.end());
    }
    return {pattern_->rows(),
            pattern_->rows(),
            pattern_->nonzeros(),
            outer_int_.data(),
            pattern_->inner().data(),
            values_.data()};
}

Eigen::VectorXd StencilMatrix::multiply(const Eigen::VectorXd& x) const {
    const auto& outer = pattern_->outer();
    const auto& inner = pattern_->inner();
    Eigen::VectorXd y(pattern_->rows());
    for (std::int64_t i = 0; i < pattern_->rows(); ++i) {
        double s = 0.0;
        for (std::int64_t k = outer[i]; k < outer[i + 1]; ++k) {
            s += values_[k] * x[inner[k]];
        }
        y[i] = s;
    }
    return y;
}

StencilMatrix StencilMatrix::added(const StencilMatrix& other) const {
    if (other.pattern_ != pattern_) {
        throw std::invalid_argument("StencilMatrix: patterns must be shared to add");
    }
    StencilMatrix out(pattern_);
    for (std::size_t k = 0; k < values_.size(); ++k) {
        out.values_[k] = values_[k] + other.values_[k];
    }
    return out;
}

}  // namespace stiga
