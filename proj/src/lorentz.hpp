#pragma once

#include <cmath>
#include <vector>

#include "udw/geometry.hpp"

namespace udw::geometry::detail {

// Pure boost with velocity v (|v| < 1), acting on coordinates relative to the origin.
struct Boost {
    std::vector<double> v;
    double gamma = 1.0;
    double v2 = 0.0;

    explicit Boost(std::vector<double> vel) : v(std::move(vel)) {
        for (double c : v) v2 += c * c;
        gamma = 1.0 / std::sqrt(1.0 - v2);
    }

    SpacetimePoint apply(const SpacetimePoint& p) const {
        double vx = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) vx += v[i] * p.x[i];
        SpacetimePoint q{gamma * (p.t - vx), p.x};
        const double k = v2 > 0.0 ? (gamma - 1.0) * vx / v2 - gamma * p.t : 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) q.x[i] += k * v[i];
        return q;
    }

    Boost inverse() const {
        std::vector<double> w = v;
        for (double& c : w) c = -c;
        return Boost(std::move(w));
    }
};

inline SpacetimePoint add(const SpacetimePoint& a, const SpacetimePoint& b) {
    SpacetimePoint r{a.t + b.t, a.x};
    for (std::size_t i = 0; i < r.x.size(); ++i) r.x[i] += b.x[i];
    return r;
}

inline SpacetimePoint sub(const SpacetimePoint& a, const SpacetimePoint& b) {
    SpacetimePoint r{a.t - b.t, a.x};
    for (std::size_t i = 0; i < r.x.size(); ++i) r.x[i] -= b.x[i];
    return r;
}

}  // namespace udw::geometry::detail
