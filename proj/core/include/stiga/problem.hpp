#pragma once

#include <array>
#include <functional>

namespace stiga {

using SpatialPoint = std::array<double, 2>;   // up to two spatial coordinates
using Velocity = std::array<double, 2>;

/// Scalar data callback: f(x, t).  Steady problems receive t = 0.
using ScalarFn = std::function<double(const SpatialPoint&, double)>;
/// Space-time gradient of a scalar field: (d/dx1, d/dx2, d/dt).
using GradientFn = std::function<std::array<double, 3>(const SpatialPoint&, double)>;
/// Convection field beta(x); divergence-free by contract.
using VelocityFn = std::function<Velocity(const SpatialPoint&)>;

/// Coefficients and data of one transport problem.  Null callbacks mean
/// identically zero.
struct ProblemData {
    int d = 1;               // spatial dimension, 1 or 2
    bool transient = true;   // false drops the time direction entirely
    VelocityFn beta;
    double mu = 0.0;         // scalar diffusion, >= 0
    ScalarFn source;
    ScalarFn dirichlet;                             // boundary data u(x, t)
    std::function<double(const SpatialPoint&)> initial;  // u(x, 0)
    ScalarFn exact;          // optional manufactured solution
    GradientFn exact_gradient;

    Velocity beta_at(const SpatialPoint& x) const {
        return beta ? beta(x) : Velocity{0.0, 0.0};
    }
    double source_at(const SpatialPoint& x, double t) const {
        return source ? source(x, t) : 0.0;
    }
    double dirichlet_at(const SpatialPoint& x, double t) const {
        return dirichlet ? dirichlet(x, t) : 0.0;
    }
    double initial_at(const SpatialPoint& x) const {
        return initial ? initial(x) : 0.0;
    }
};

}  // namespace stiga
