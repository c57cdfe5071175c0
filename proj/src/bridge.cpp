#include <algorithm>
#include <cmath>
#include <limits>

#include "lorentz.hpp"
#include "udw/geometry.hpp"

namespace udw::geometry {

namespace {

using detail::Boost;

// First s >= 0 where the monotone predicate along the ray becomes true.
template <class Inside>
double first_entry(Inside inside) {
    if (inside(0.0)) return 0.0;
    double hi = 1.0;
    while (!inside(hi)) {
        hi *= 2.0;
        if (hi > 1e12) return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    for (int i = 0; i < 80 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? hi : lo) = mid;
    }
    return lo;
}

// Margin of a primed-frame point: how far along ±e_t' one can go before entering J±(M).
struct Frame {
    Boost to_primed;
    Boost to_original;
    const RegionSet& m;

    SpacetimePoint original(const SpacetimePoint& primed) const { return to_original.apply(primed); }

    double margin(const SpacetimePoint& zp) const {
        auto shifted = [&](double s) {
            SpacetimePoint q = zp;
            q.t += s;
            return original(q);
        };
        const double up = first_entry([&](double s) { return in_causal_future(shifted(s), m); });
        const double down = first_entry([&](double s) { return in_causal_past(shifted(-s), m); });
        return std::min(up, down);
    }

    Diamond diamond(const SpacetimePoint& cp, double eps) const {
        SpacetimePoint a = cp, b = cp;
        a.t -= eps;
        b.t += eps;
        return Diamond{original(a), original(b)};
    }

    bool avoids(const Diamond& d) const { return !in_causal_future(d.future, m) && !in_causal_past(d.past, m); }
};

using Path = std::vector<std::vector<double>>;

std::vector<double> lerp(const std::vector<double>& a, const std::vector<double>& b, double s) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * (b[i] - a[i]);
    return r;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

// Minimal margin along a polyline, sampled densely plus at the feet of the obstacle's corners.
double path_margin(const Frame& f, const Path& path, double ts, const std::vector<std::vector<double>>& anchors,
                   std::size_t samples) {
    double mu = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const auto& a = path[k];
        const auto& b = path[k + 1];
        std::vector<double> params;
        for (std::size_t i = 0; i <= samples; ++i) params.push_back(static_cast<double>(i) / static_cast<double>(samples));
        std::vector<double> ab(a.size());
        double len2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ab[i] = b[i] - a[i];
            len2 += ab[i] * ab[i];
        }
        if (len2 > 0.0)
            for (const auto& c : anchors) {
                double dot = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) dot += (c[i] - a[i]) * ab[i];
                params.push_back(std::clamp(dot / len2, 0.0, 1.0));
            }
        for (double s : params) {
            mu = std::min(mu, f.margin(SpacetimePoint{ts, lerp(a, b, s)}));
            if (mu <= 0.0) return 0.0;
        }
    }
    return mu;
}

RegionSet cover(const Frame& f, const Path& path, double ts, double eps, std::size_t cap) {
    RegionSet r;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double len = spatial_distance(path[k], path[k + 1]);
        const auto steps = static_cast<std::size_t>(std::ceil(len / eps));
        for (std::size_t i = (k == 0 ? 0 : 1); i <= steps; ++i) {
            const double s = steps == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps);
            r.diamonds.push_back(f.diamond(SpacetimePoint{ts, lerp(path[k], path[k + 1], s)}, eps));
            if (r.diamonds.size() > cap) throw GeometryError(GeometryErrc::NoBridge, "bridge needs too many diamonds");
        }
    }
    return r;
}

}  // namespace

double causal_margin(const SpacetimePoint& p, const RegionSet& r) {
    const std::vector<double> zero(p.x.size(), 0.0);
    Frame f{Boost(zero), Boost(zero), r};
    return f.margin(p);
}

Diamond safe_diamond(const SpacetimePoint& p, const RegionSet& r) {
    const double eps = 0.5 * causal_margin(p, r);
    SpacetimePoint a = p, b = p;
    a.t -= eps;
    b.t += eps;
    return Diamond{a, b};
}

RegionSet causally_convex_bridge(const SpacetimePoint& x, const SpacetimePoint& y, const MeasurementRegion& m,
                                 const BridgeOptions& opt) {
    if (x.dimension() != m.dimension() || y.dimension() != m.dimension())
        throw GeometryError(GeometryErrc::DimensionMismatch, "bridge endpoints and measurement differ in dimension");
    const RegionSet mr = m.region();
    if (in_causal_shadow(x, mr) || in_causal_shadow(y, mr))
        throw GeometryError(GeometryErrc::InvalidRegion, "bridge endpoint inside J(M)");

    const std::size_t n = x.x.size();
    const double dt = y.t - x.t;
    const double dx = spatial_distance(x.x, y.x);

    if (std::abs(dt) >= dx) {
        const SpacetimePoint& lo = dt >= 0.0 ? x : y;
        const SpacetimePoint& hi = dt >= 0.0 ? y : x;
        const std::vector<double> zero(n, 0.0);
        const Frame f{Boost(zero), Boost(zero), mr};
        const double up = first_entry([&](double s) { return in_causal_future(SpacetimePoint{hi.t + s, hi.x}, mr); });
        const double down = first_entry([&](double s) { return in_causal_past(SpacetimePoint{lo.t - s, lo.x}, mr); });
        double eps = 0.5 * std::min(up, down);
        if (!std::isfinite(eps)) eps = 1.0 + dx;
        RegionSet r;
        r.diamonds.push_back(Diamond{SpacetimePoint{lo.t - eps, lo.x}, SpacetimePoint{hi.t + eps, hi.x}});
        if (!f.avoids(r.diamonds.front())) throw GeometryError(GeometryErrc::NoBridge, "no diamond avoids J(M)");
        return r;
    }

    std::vector<double> vel(n);
    for (std::size_t i = 0; i < n; ++i) vel[i] = dt * (y.x[i] - x.x[i]) / (dx * dx);
    const Boost to_primed(vel);
    const Frame f{to_primed, to_primed.inverse(), mr};
    const SpacetimePoint xp = to_primed.apply(x);
    const SpacetimePoint yp = to_primed.apply(y);
    const double ts = 0.5 * (xp.t + yp.t);

    std::vector<std::vector<double>> anchors;
    std::vector<double> centre(n, 0.0);
    double radius = 0.0;
    std::vector<SpacetimePoint> corners;
    for (const auto& part : m.parts())
        for (const auto& v : part.vertices()) corners.push_back(to_primed.apply(v));
    for (const auto& c : corners) {
        anchors.push_back(c.x);
        for (std::size_t i = 0; i < n; ++i) centre[i] += c.x[i] / static_cast<double>(corners.size());
    }
    for (const auto& c : corners) radius = std::max(radius, spatial_distance(c.x, centre) + std::abs(c.t - ts));
    anchors.push_back(centre);

    std::vector<Path> candidates{{xp.x, yp.x}};
    if (n >= 2) {
        std::vector<double> dir(n), u(n);
        for (std::size_t i = 0; i < n; ++i) dir[i] = (yp.x[i] - xp.x[i]);
        const double len = norm(dir);
        for (double& c : dir) c /= len;
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += (centre[i] - xp.x[i]) * dir[i];
        for (std::size_t i = 0; i < n; ++i) u[i] = centre[i] - xp.x[i] - proj * dir[i];
        if (norm(u) < 1e-9 * (1.0 + radius)) {
            std::size_t k = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (std::abs(dir[i]) < std::abs(dir[k])) k = i;
            std::fill(u.begin(), u.end(), 0.0);
            u[k] = 1.0;
            const double d = dir[k];
            for (std::size_t i = 0; i < n; ++i) u[i] -= d * dir[i];
        }
        const double un = norm(u);
        for (double& c : u) c /= un;
        const double base = std::max(radius, 0.5 * len);
        for (double scale : {1.5, 3.0, 6.0, 12.0})
            for (double sign : {-1.0, 1.0}) {
                const double h = sign * scale * base;
                auto off = [&](const std::vector<double>& p, double back) {
                    std::vector<double> q(n);
                    for (std::size_t i = 0; i < n; ++i) q[i] = p[i] + h * u[i] + back * dir[i];
                    return q;
                };
                candidates.push_back({xp.x, off(xp.x, 0.0), off(yp.x, 0.0), yp.x});
                const double r = scale * base;
                std::vector<double> xb(n), yb(n);
                for (std::size_t i = 0; i < n; ++i) {
                    xb[i] = xp.x[i] - r * dir[i];
                    yb[i] = yp.x[i] + r * dir[i];
                }
                candidates.push_back({xp.x, xb, off(xp.x, -r), off(yp.x, r), yb, yp.x});
            }
    }

    for (const auto& path : candidates) {
        const double mu = path_margin(f, path, ts, anchors, opt.path_samples);
        if (!(mu > 0.0)) continue;
        double shortest = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < path.size(); ++k)
            shortest = std::min(shortest, spatial_distance(path[k], path[k + 1]));
        double eps = 0.5 * std::min(mu, 0.5 * shortest);
        if (!std::isfinite(eps)) eps = 0.25 * shortest;
        for (int attempt = 0; attempt < 8; ++attempt, eps *= 0.5) {
            RegionSet r;
            try {
                r = cover(f, path, ts, eps, opt.max_diamonds);
            } catch (const GeometryError&) {
                break;
            }
            bool ok = true;
            for (const auto& d : r.diamonds) ok = ok && f.avoids(d);
            if (ok) return r;
        }
    }
    if (n == 1) throw GeometryError(GeometryErrc::NoBridge, "d=2: J(M) separates the two points");
    throw GeometryError(GeometryErrc::NoBridge, "no polyline around J(M) found");
}

}  // namespace udw::geometry
