#include "udw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lorentz.hpp"
#include "udw/rng.hpp"

namespace udw::geometry {

namespace {

void require_dim(int a, int b) {
    if (a != b) {
        std::ostringstream os;
        os << "dimension mismatch: " << a << " vs " << b;
        throw GeometryError(GeometryErrc::DimensionMismatch, os.str());
    }
}

void require_finite(const SpacetimePoint& p) {
    bool ok = std::isfinite(p.t);
    for (double v : p.x) ok = ok && std::isfinite(v);
    if (!ok) throw GeometryError(GeometryErrc::InvalidRegion, "non-finite coordinate");
}

double clamp_axis(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

bool boxes_intersect(const BoxRegion& a, const BoxRegion& b) {
    if (a.hi.t < b.lo.t || b.hi.t < a.lo.t) return false;
    for (std::size_t i = 0; i < a.lo.x.size(); ++i)
        if (a.hi.x[i] < b.lo.x[i] || b.hi.x[i] < a.lo.x[i]) return false;
    return true;
}

bool box_within(const BoxRegion& inner, const BoxRegion& outer) {
    if (inner.lo.t < outer.lo.t || inner.hi.t > outer.hi.t) return false;
    for (std::size_t i = 0; i < inner.lo.x.size(); ++i)
        if (inner.lo.x[i] < outer.lo.x[i] || inner.hi.x[i] > outer.hi.x[i]) return false;
    return true;
}

}  // namespace

BoxRegion BoxRegion::make(const SpacetimePoint& lo, const SpacetimePoint& hi) {
    require_dim(lo.dimension(), hi.dimension());
    if (lo.dimension() < 2) throw GeometryError(GeometryErrc::InvalidRegion, "dimension must be >= 2");
    require_finite(lo);
    require_finite(hi);
    bool ok = lo.t <= hi.t;
    for (std::size_t i = 0; i < lo.x.size(); ++i) ok = ok && lo.x[i] <= hi.x[i];
    if (!ok) throw GeometryError(GeometryErrc::InvalidRegion, "box has lo > hi");
    return BoxRegion{lo, hi};
}

BoxRegion BoxRegion::at(const SpacetimePoint& p) { return make(p, p); }

bool BoxRegion::contains(const SpacetimePoint& p) const {
    require_dim(p.dimension(), dimension());
    if (p.t < lo.t || p.t > hi.t) return false;
    for (std::size_t i = 0; i < p.x.size(); ++i)
        if (p.x[i] < lo.x[i] || p.x[i] > hi.x[i]) return false;
    return true;
}

SpacetimePoint BoxRegion::center() const {
    SpacetimePoint c{0.5 * (lo.t + hi.t), std::vector<double>(lo.x.size())};
    for (std::size_t i = 0; i < lo.x.size(); ++i) c.x[i] = 0.5 * (lo.x[i] + hi.x[i]);
    return c;
}

std::vector<SpacetimePoint> BoxRegion::vertices() const {
    const std::size_t n = lo.x.size() + 1;
    std::vector<SpacetimePoint> out;
    out.reserve(std::size_t{1} << n);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        SpacetimePoint v{(mask & 1) ? hi.t : lo.t, std::vector<double>(n - 1)};
        for (std::size_t i = 0; i + 1 < n; ++i) v.x[i] = (mask >> (i + 1)) & 1 ? hi.x[i] : lo.x[i];
        out.push_back(std::move(v));
    }
    return out;
}

BoxRegion BoxRegion::top_face() const {
    BoxRegion f = *this;
    f.lo.t = hi.t;
    return f;
}

BoxRegion BoxRegion::bottom_face() const {
    BoxRegion f = *this;
    f.hi.t = lo.t;
    return f;
}

bool Diamond::contains(const SpacetimePoint& p) const {
    require_dim(p.dimension(), past.dimension());
    return p.t - past.t > spatial_distance(p.x, past.x) && future.t - p.t > spatial_distance(p.x, future.x);
}

int RegionSet::dimension() const {
    if (!boxes.empty()) return boxes.front().dimension();
    if (!points.empty()) return points.front().dimension();
    if (!diamonds.empty()) return diamonds.front().past.dimension();
    return 0;
}

bool RegionSet::contains(const SpacetimePoint& p) const {
    for (const auto& b : boxes)
        if (b.contains(p)) return true;
    for (const auto& q : points) {
        require_dim(p.dimension(), q.dimension());
        if (q.t == p.t && q.x == p.x) return true;
    }
    for (const auto& d : diamonds)
        if (d.contains(p)) return true;
    return false;
}

RegionSet region_of(const BoxRegion& b) { return RegionSet{{b}, {}, {}}; }
RegionSet region_of(const SpacetimePoint& p) { return RegionSet{{}, {p}, {}}; }

SpacetimePoint reflect(const SpacetimePoint& p) { return SpacetimePoint{-p.t, p.x}; }

BoxRegion reflect(const BoxRegion& b) {
    BoxRegion r = b;
    r.lo.t = -b.hi.t;
    r.hi.t = -b.lo.t;
    return r;
}

RegionSet reflect(const RegionSet& r) {
    RegionSet out;
    for (const auto& b : r.boxes) out.boxes.push_back(reflect(b));
    for (const auto& p : r.points) out.points.push_back(reflect(p));
    for (const auto& d : r.diamonds) out.diamonds.push_back(Diamond{reflect(d.future), reflect(d.past)});
    return out;
}

double spatial_distance(const std::vector<double>& a, const std::vector<double>& b) {
    require_dim(static_cast<int>(a.size()), static_cast<int>(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double spatial_distance(const std::vector<double>& x, const BoxRegion& b) {
    require_dim(static_cast<int>(x.size()) + 1, b.dimension());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - clamp_axis(x[i], b.lo.x[i], b.hi.x[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

double spatial_gap(const BoxRegion& a, const BoxRegion& b) {
    require_dim(a.dimension(), b.dimension());
    double s = 0.0;
    for (std::size_t i = 0; i < a.lo.x.size(); ++i) {
        const double d = std::max({0.0, a.lo.x[i] - b.hi.x[i], b.lo.x[i] - a.hi.x[i]});
        s += d * d;
    }
    return std::sqrt(s);
}

bool in_causal_future(const SpacetimePoint& p, const SpacetimePoint& a) {
    require_dim(p.dimension(), a.dimension());
    return p.t - a.t >= spatial_distance(p.x, a.x);
}

bool in_causal_future(const SpacetimePoint& p, const BoxRegion& a) {
    require_dim(p.dimension(), a.dimension());
    return p.t - a.lo.t >= spatial_distance(p.x, a);
}

bool in_causal_future(const SpacetimePoint& p, const RegionSet& a) {
    for (const auto& b : a.boxes)
        if (in_causal_future(p, b)) return true;
    for (const auto& q : a.points)
        if (in_causal_future(p, q)) return true;
    // Closure of the open diamond has the same causal future as its past tip.
    for (const auto& d : a.diamonds)
        if (in_causal_future(p, d.past)) return true;
    return false;
}

bool in_causal_past(const SpacetimePoint& p, const SpacetimePoint& a) { return in_causal_future(a, p); }

bool in_causal_past(const SpacetimePoint& p, const BoxRegion& a) {
    return in_causal_future(reflect(p), reflect(a));
}

bool in_causal_past(const SpacetimePoint& p, const RegionSet& a) {
    return in_causal_future(reflect(p), reflect(a));
}

bool in_causal_shadow(const SpacetimePoint& p, const RegionSet& a) {
    return in_causal_future(p, a) || in_causal_past(p, a);
}

bool in_future_domain_of_dependence(const SpacetimePoint& p, const BoxRegion& slice) {
    require_dim(p.dimension(), slice.dimension());
    if (!slice.degenerate_in_time())
        throw GeometryError(GeometryErrc::NotSliceContained, "region is not contained in a constant-time slice");
    const double r = p.t - slice.lo.t;
    if (r < 0.0) return false;
    for (std::size_t i = 0; i < p.x.size(); ++i)
        if (p.x[i] - r < slice.lo.x[i] || p.x[i] + r > slice.hi.x[i]) return false;
    return true;
}

bool box_meets_future(const BoxRegion& a, const BoxRegion& b) {
    return a.hi.t - b.lo.t >= spatial_gap(a, b);
}

bool boxes_spacelike(const BoxRegion& a, const BoxRegion& b) {
    const double dt = std::max(std::abs(a.hi.t - b.lo.t), std::abs(b.hi.t - a.lo.t));
    return spatial_gap(a, b) > dt;
}

bool box_in_future(const BoxRegion& a, const BoxRegion& b) {
    for (const auto& v : a.vertices())
        if (!in_causal_future(v, b)) return false;
    return true;
}

bool box_in_past(const BoxRegion& a, const BoxRegion& b) { return box_in_future(reflect(a), reflect(b)); }

// ---------------------------------------------------------------- measurements

BoxRegion domain_of_dependence_apex(const BoxRegion& slice) {
    if (!slice.degenerate_in_time())
        throw GeometryError(GeometryErrc::NotSliceContained, "apex requires a constant-time slice");
    double w = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < slice.lo.x.size(); ++i) w = std::min(w, 0.5 * (slice.hi.x[i] - slice.lo.x[i]));
    BoxRegion r = slice;
    r.lo.t = r.hi.t = slice.lo.t + w;
    for (std::size_t i = 0; i < slice.lo.x.size(); ++i) {
        const double c = 0.5 * (slice.lo.x[i] + slice.hi.x[i]);
        const double half = 0.5 * (slice.hi.x[i] - slice.lo.x[i]) - w;
        r.lo.x[i] = c - half;
        r.hi.x[i] = c + half;
    }
    return r;
}

MeasurementRegion MeasurementRegion::single_box(const std::string& label, const BoxRegion& box) {
    MeasurementRegion m{label, box, box.top_face(), box.top_face()};
    m.validate();
    return m;
}

MeasurementRegion MeasurementRegion::with_defaults(const std::string& label, const BoxRegion& coupling,
                                                   const std::optional<BoxRegion>& output,
                                                   const std::optional<BoxRegion>& delay) {
    MeasurementRegion m;
    m.label = label;
    m.coupling = coupling;
    m.output = output ? *output : coupling.top_face();
    m.delay = delay ? *delay : domain_of_dependence_apex(m.output.top_face());
    m.validate();
    return m;
}

RegionSet MeasurementRegion::region() const { return RegionSet{parts(), {}, {}}; }

bool MeasurementRegion::contains(const SpacetimePoint& p) const {
    return coupling.contains(p) || output.contains(p) || delay.contains(p);
}

void MeasurementRegion::validate() const {
    const int d = coupling.dimension();
    if (d < 2) throw GeometryError(GeometryErrc::InvalidRegion, "dimension must be >= 2");
    require_dim(output.dimension(), d);
    require_dim(delay.dimension(), d);
    for (const auto* b : {&coupling, &output, &delay}) BoxRegion::make(b->lo, b->hi);
    if (!box_in_future(output, coupling))
        throw GeometryError(GeometryErrc::InvalidRegion, label + ": output region not inside J+(coupling)");
    // M_d equal to M_o models a measurement without processing delay.
    if (delay.lo.t == output.lo.t && delay.hi.t == output.hi.t && delay.lo.x == output.lo.x &&
        delay.hi.x == output.hi.x)
        return;
    const BoxRegion ridge = domain_of_dependence_apex(output.top_face());
    if (!box_in_future(delay.top_face(), ridge))
        throw GeometryError(GeometryErrc::InvalidRegion, label + ": delay tip precedes the D+(output) apex");
}

// ---------------------------------------------------------------- P+_M / P-_M

KnowledgeRegion::KnowledgeRegion(std::vector<Piece> pieces, bool past) : pieces_(std::move(pieces)), past_(past) {}

namespace {

bool excluded(const KnowledgeRegion::Piece& piece, const std::vector<double>& q) {
    for (const auto& e : piece.exclusions)
        if (spatial_distance(q, e.box) <= e.reach) return true;
    return false;
}

std::vector<KnowledgeRegion::Piece> tip_pieces(const std::vector<BoxRegion>& parts) {
    std::vector<KnowledgeRegion::Piece> out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        KnowledgeRegion::Piece piece{parts[i].top_face(), {}};
        const double tf = piece.face.lo.t;
        for (std::size_t j = 0; j < parts.size(); ++j) {
            if (j == i) continue;
            const double reach = parts[j].hi.t - tf;
            if (reach <= 0.0 || spatial_gap(piece.face, parts[j]) > reach) continue;
            piece.exclusions.push_back({parts[j], reach});
        }
        bool fully = false;
        for (const auto& e : piece.exclusions) {
            bool all = true;
            for (const auto& v : piece.face.vertices()) all = all && spatial_distance(v.x, e.box) <= e.reach;
            if (all) {
                fully = true;
                break;
            }
        }
        if (!fully) out.push_back(std::move(piece));
    }
    return out;
}

}  // namespace

bool KnowledgeRegion::piece_contains(const Piece& piece, const SpacetimePoint& p) const {
    const BoxRegion& f = piece.face;
    const double rho = p.t - f.lo.t;
    if (rho < 0.0 || spatial_distance(p.x, f) > rho) return false;
    if (piece.exclusions.empty()) return true;

    const std::size_t n = p.x.size();
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = clamp_axis(p.x[i], f.lo.x[i], f.hi.x[i]);
    if (!excluded(piece, q)) return true;

    // Candidate set X_F ∩ B(x_p, rho) scanned on a deterministic grid.
    const std::size_t per_axis = n == 1 ? 257 : n == 2 ? 65 : 17;
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = std::max(f.lo.x[i], p.x[i] - rho);
        hi[i] = std::min(f.hi.x[i], p.x[i] + rho);
    }
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        for (std::size_t i = 0; i < n; ++i)
            q[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
        if (spatial_distance(q, p.x) <= rho && !excluded(piece, q)) return true;
        std::size_t k = 0;
        while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
        if (k == n) break;
    }
    return false;
}

bool KnowledgeRegion::contains(const SpacetimePoint& p) const {
    const SpacetimePoint q = past_ ? reflect(p) : p;
    for (const auto& piece : pieces_)
        if (piece_contains(piece, q)) return true;
    return false;
}

bool KnowledgeRegion::contains_box(const BoxRegion& b) const {
    const BoxRegion bb = past_ ? reflect(b) : b;
    const auto verts = bb.vertices();
    for (const auto& piece : pieces_) {
        bool all = true;
        for (const auto& v : verts) all = all && in_causal_future(v, piece.face);
        if (!all) continue;
        if (piece.exclusions.empty()) return true;
        bool ok = true;
        for (const auto& v : verts) ok = ok && piece_contains(piece, v);
        if (ok) return true;
    }
    return false;
}

KnowledgeRegion future_region_of_knowledge(const MeasurementRegion& m) {
    return KnowledgeRegion(tip_pieces(m.parts()), false);
}

KnowledgeRegion past_region_of_knowledge(const MeasurementRegion& m) {
    std::vector<BoxRegion> parts;
    for (const auto& b : m.parts()) parts.push_back(reflect(b));
    return KnowledgeRegion(tip_pieces(parts), true);
}

// ---------------------------------------------------------------- classification

const char* to_string(Relation r) {
    switch (r) {
        case Relation::Spacelike: return "Spacelike";
        case Relation::InPPlus: return "InPPlus";
        case Relation::InPMinus: return "InPMinus";
        case Relation::FutureStrip: return "FutureStrip";
        case Relation::PastStrip: return "PastStrip";
        case Relation::Interior: return "Interior";
        case Relation::Mixed: return "Mixed";
    }
    return "?";
}

Relation classify(const SpacetimePoint& p, const MeasurementRegion& m) {
    require_dim(p.dimension(), m.dimension());
    if (m.contains(p)) return Relation::Interior;
    if (future_region_of_knowledge(m).contains(p)) return Relation::InPPlus;
    if (past_region_of_knowledge(m).contains(p)) return Relation::InPMinus;
    const RegionSet r = m.region();
    if (in_causal_future(p, r)) return Relation::FutureStrip;
    if (in_causal_past(p, r)) return Relation::PastStrip;
    return Relation::Spacelike;
}

std::vector<Relation> classify(const SpacetimePoint& p, const std::vector<MeasurementRegion>& ms) {
    std::vector<Relation> out;
    out.reserve(ms.size());
    for (const auto& m : ms) out.push_back(classify(p, m));
    return out;
}

Relation classify(const BoxRegion& b, const MeasurementRegion& m) {
    require_dim(b.dimension(), m.dimension());
    const auto parts = m.parts();
    for (const auto& part : parts) {
        if (box_within(b, part)) return Relation::Interior;
    }
    for (const auto& part : parts)
        if (boxes_intersect(b, part)) return Relation::Mixed;
    bool spacelike = true;
    for (const auto& part : parts) spacelike = spacelike && boxes_spacelike(b, part);
    if (spacelike) return Relation::Spacelike;
    if (future_region_of_knowledge(m).contains_box(b)) return Relation::InPPlus;
    if (past_region_of_knowledge(m).contains_box(b)) return Relation::InPMinus;
    return Relation::Mixed;
}

Relation classify(const RegionSet& r, const MeasurementRegion& m) {
    std::optional<Relation> common;
    auto merge = [&](Relation x) {
        if (!common) common = x;
        else if (*common != x) common = Relation::Mixed;
    };
    for (const auto& b : r.boxes) merge(classify(b, m));
    for (const auto& p : r.points) merge(classify(p, m));
    const RegionSet mr = m.region();
    const auto plus = future_region_of_knowledge(m);
    const auto minus = past_region_of_knowledge(m);
    for (const auto& d : r.diamonds) {
        if (!in_causal_future(d.future, mr) && !in_causal_past(d.past, mr)) merge(Relation::Spacelike);
        else if (plus.contains(d.past)) merge(Relation::InPPlus);
        else if (minus.contains(d.future)) merge(Relation::InPMinus);
        else merge(Relation::Mixed);
    }
    return common.value_or(Relation::Mixed);
}

std::string aggregate_label(const std::vector<Relation>& rel, const std::vector<std::string>& labels) {
    bool all_space = true;
    for (Relation r : rel) all_space = all_space && r == Relation::Spacelike;
    if (all_space) {
        std::string s = "S_";
        for (const auto& l : labels) s += l;
        return s;
    }
    std::string plus, minus, other;
    for (std::size_t i = 0; i < rel.size(); ++i) {
        switch (rel[i]) {
            case Relation::InPPlus: plus += (plus.empty() ? "" : "∩") + std::string("P+_") + labels[i]; break;
            case Relation::InPMinus: minus += (minus.empty() ? "" : "∩") + std::string("P-_") + labels[i]; break;
            case Relation::Spacelike: break;
            default: other += (other.empty() ? "" : ",") + std::string(to_string(rel[i])) + "_" + labels[i]; break;
        }
    }
    if (!other.empty()) return other;
    std::string s = plus;
    if (!minus.empty()) s += (s.empty() ? "" : "∩") + minus;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < rel.size(); ++i)
        if (rel[i] == Relation::Spacelike) rest.push_back(labels[i]);
    if (!rest.empty()) {
        s += "\\S_";
        for (const auto& l : rest) s += l;
    }
    return s;
}

const char* to_string(Order o) {
    switch (o) {
        case Order::Before: return "Before";
        case Order::After: return "After";
        case Order::Both: return "Both";
        case Order::Incomparable: return "Incomparable";
    }
    return "?";
}

Order measurement_partial_order(const MeasurementRegion& a, const MeasurementRegion& b) {
    require_dim(a.dimension(), b.dimension());
    auto precedes = [](const MeasurementRegion& m1, const MeasurementRegion& m2) {
        for (const auto& p1 : m1.parts())
            for (const auto& p2 : m2.parts())
                if (box_meets_future(p1, p2)) return false;
        return true;
    };
    const bool ab = precedes(a, b);
    const bool ba = precedes(b, a);
    if (ab && ba) return Order::Both;
    if (ab) return Order::Before;
    if (ba) return Order::After;
    return Order::Incomparable;
}

std::vector<std::size_t> causal_order(const std::vector<MeasurementRegion>& ms) {
    const std::size_t n = ms.size();
    std::vector<std::vector<bool>> before(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Order o = measurement_partial_order(ms[i], ms[j]);
            if (o == Order::Incomparable)
                throw GeometryError(GeometryErrc::InvalidRegion,
                                    "measurements " + ms[i].label + " and " + ms[j].label + " are causally incomparable");
            if (o == Order::Before) before[i][j] = true;
            if (o == Order::After) before[j][i] = true;
        }
    std::vector<std::size_t> out;
    std::vector<bool> placed(n, false);
    while (out.size() < n) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < n; ++i) {
            if (placed[i]) continue;
            bool ready = true;
            for (std::size_t j = 0; j < n; ++j) ready = ready && (placed[j] || !before[j][i]);
            if (ready && (!pick || ms[i].label < ms[*pick].label)) pick = i;
        }
        if (!pick) throw GeometryError(GeometryErrc::InvalidRegion, "cyclic causal order");
        placed[*pick] = true;
        out.push_back(*pick);
    }
    return out;
}

// ---------------------------------------------------------------- prescriptions

const char* to_string(PrescriptionStatus s) {
    switch (s) {
        case PrescriptionStatus::P1Inside: return "P1_inside";
        case PrescriptionStatus::P1Outside: return "P1_outside";
        case PrescriptionStatus::P2: return "P2";
        case PrescriptionStatus::ConflictContained: return "ConflictContained";
        case PrescriptionStatus::ConflictPartial: return "ConflictPartial";
    }
    return "?";
}

namespace {

// Some event of the box lies on or below the chord between a and b.
bool box_under_chord(const SpacetimePoint& a, const SpacetimePoint& b, const BoxRegion& box) {
    double s0 = 0.0, s1 = 1.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        const double d = b.x[i] - a.x[i];
        if (d == 0.0) {
            if (a.x[i] < box.lo.x[i] || a.x[i] > box.hi.x[i]) return false;
            continue;
        }
        double ta = (box.lo.x[i] - a.x[i]) / d;
        double tb = (box.hi.x[i] - a.x[i]) / d;
        if (ta > tb) std::swap(ta, tb);
        s0 = std::max(s0, ta);
        s1 = std::min(s1, tb);
        if (s0 > s1) return false;
    }
    const double t0 = a.t + s0 * (b.t - a.t);
    const double t1 = a.t + s1 * (b.t - a.t);
    return std::max(t0, t1) >= box.lo.t;
}

}  // namespace

PrescriptionReport prescription_status(const std::vector<SpacetimePoint>& points, const MeasurementRegion& m,
                                       const PrescriptionOptions& opt) {
    if (points.empty()) throw GeometryError(GeometryErrc::InvalidRegion, "prescription needs at least one point");
    std::size_t inside = 0;
    for (const auto& p : points) {
        const Relation r = classify(p, m);
        if (r == Relation::InPPlus) ++inside;
        else if (r != Relation::Spacelike && r != Relation::InPMinus)
            throw GeometryError(GeometryErrc::StripPoint,
                                std::string("point without definite relation to ") + m.label + ": " + to_string(r));
    }
    PrescriptionReport rep;
    rep.exact = true;
    if (inside == points.size()) {
        rep.status = PrescriptionStatus::P1Inside;
        return rep;
    }
    if (inside > 0) {
        rep.status = PrescriptionStatus::P2;
        return rep;
    }
    if (points.size() == 1) {
        rep.status = PrescriptionStatus::P1Outside;
        return rep;
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            for (const auto& part : m.parts())
                if (box_under_chord(points[i], points[j], part)) {
                    rep.status = PrescriptionStatus::ConflictContained;
                    return rep;
                }

    rep.exact = false;
    double tmax = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) tmax = std::max(tmax, p.t);
    const double horizon = tmax + opt.horizon;
    const std::size_t n = points.front().x.size();
    std::vector<double> lo(n, -std::numeric_limits<double>::infinity()), hi(n, std::numeric_limits<double>::infinity());
    for (const auto& p : points)
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = std::max(lo[i], p.x[i] - (horizon - p.t));
            hi[i] = std::min(hi[i], p.x[i] + (horizon - p.t));
        }
    Rng rng(opt.seed);
    const RegionSet mr = m.region();
    const std::size_t max_attempts = 2000 * std::max<std::size_t>(opt.samples, 1);
    std::size_t attempts = 0;
    SpacetimePoint q{0.0, std::vector<double>(n)};
    while (rep.samples < opt.samples && attempts < max_attempts) {
        ++attempts;
        q.t = rng.uniform(tmax, horizon);
        for (std::size_t i = 0; i < n; ++i) q.x[i] = rng.uniform(lo[i], hi[i]);
        bool in_all = true;
        for (const auto& p : points) in_all = in_all && in_causal_future(q, p);
        if (!in_all) continue;
        ++rep.samples;
        if (in_causal_future(q, mr)) ++rep.inside_future;
    }
    if (rep.inside_future == 0) rep.status = PrescriptionStatus::P1Outside;
    else if (rep.inside_future == rep.samples) rep.status = PrescriptionStatus::ConflictContained;
    else rep.status = PrescriptionStatus::ConflictPartial;
    return rep;
}

// ---------------------------------------------------------------- convexity sampler

namespace {

struct Sampler {
    Rng& rng;

    SpacetimePoint in_box(const BoxRegion& b) {
        SpacetimePoint p{rng.uniform(b.lo.t, b.hi.t), std::vector<double>(b.lo.x.size())};
        for (std::size_t i = 0; i < p.x.size(); ++i) p.x[i] = rng.uniform(b.lo.x[i], b.hi.x[i]);
        return p;
    }

    // Uniform point of J+(a) ∩ J-(b): drawn in the rest frame of the pair, boosted back.
    std::optional<SpacetimePoint> in_diamond(const SpacetimePoint& a, const SpacetimePoint& b, bool open) {
        const SpacetimePoint d = detail::sub(b, a);
        const std::size_t n = a.x.size();
        double dx2 = 0.0;
        for (double c : d.x) dx2 += c * c;
        const double tau2 = d.t * d.t - dx2;
        if (d.t < 0.0 || tau2 < 0.0) return std::nullopt;
        if (tau2 <= 1e-24 * (d.t * d.t + 1.0)) {
            if (open) return std::nullopt;
            const double s = rng.uniform();
            SpacetimePoint p{a.t + s * d.t, a.x};
            for (std::size_t i = 0; i < n; ++i) p.x[i] += s * d.x[i];
            return p;
        }
        const double tau = std::sqrt(tau2);
        std::vector<double> vel(n);
        for (std::size_t i = 0; i < n; ++i) vel[i] = d.x[i] / d.t;
        const detail::Boost back = detail::Boost(vel).inverse();
        // Distance u from the nearer tip has density ∝ uⁿ; the slice at u is a ball of radius u.
        const double h = 0.5 * tau;
        SpacetimePoint p{0.0, std::vector<double>(n)};
        for (int tries = 0; tries < 100; ++tries) {
            const double u = h * std::pow(rng.uniform(), 1.0 / static_cast<double>(n + 1));
            p.t = rng.uniform() < 0.5 ? u : tau - u;
            double g2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                p.x[i] = rng.normal();
                g2 += p.x[i] * p.x[i];
            }
            if (!(g2 > 0.0)) continue;
            const double rad = u * std::pow(rng.uniform(), 1.0 / static_cast<double>(n)) / std::sqrt(g2);
            for (double& c : p.x) c *= rad;
            SpacetimePoint w = detail::add(back.apply(p), a);
            const double da = w.t - a.t - spatial_distance(w.x, a.x);
            const double db = b.t - w.t - spatial_distance(w.x, b.x);
            if (!open || (da > 0.0 && db > 0.0)) return w;
        }
        return std::nullopt;
    }

    std::optional<SpacetimePoint> in_region(const RegionSet& r) {
        const std::size_t total = r.boxes.size() + r.points.size() + r.diamonds.size();
        std::size_t k = rng.index(total);
        if (k < r.boxes.size()) return in_box(r.boxes[k]);
        k -= r.boxes.size();
        if (k < r.points.size()) return r.points[k];
        k -= r.points.size();
        return in_diamond(r.diamonds[k].past, r.diamonds[k].future, true);
    }
};

}  // namespace

ConvexityReport is_causally_convex_sampled(const RegionSet& r, std::size_t n, std::uint64_t seed) {
    ConvexityReport rep;
    if (r.empty() || n == 0) return rep;
    Rng rng(seed);
    Sampler s{rng};
    const std::size_t max_attempts = 200 * n;
    // Diamond-only sets: draw index pairs uniformly among those whose tips allow a causal relation.
    std::vector<std::pair<std::size_t, std::size_t>> linked;
    const bool diamonds_only = r.boxes.empty() && r.points.empty();
    if (diamonds_only) {
        const auto& d = r.diamonds;
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t j = 0; j < d.size(); ++j)
                if (in_causal_future(d[j].future, d[i].past) || in_causal_future(d[i].future, d[j].past))
                    linked.emplace_back(i, j);
        if (linked.empty()) return rep;
    }
    for (std::size_t attempt = 0; attempt < max_attempts && rep.pairs < n; ++attempt) {
        std::optional<SpacetimePoint> p, q;
        if (diamonds_only) {
            const auto [i, j] = linked[rng.index(linked.size())];
            p = s.in_diamond(r.diamonds[i].past, r.diamonds[i].future, true);
            q = s.in_diamond(r.diamonds[j].past, r.diamonds[j].future, true);
        } else {
            p = s.in_region(r);
            q = s.in_region(r);
        }
        if (!p || !q) continue;
        if (in_causal_future(*p, *q)) std::swap(p, q);
        if (!in_causal_future(*q, *p)) continue;
        ++rep.pairs;
        for (int k = 0; k < 4; ++k) {
            auto w = s.in_diamond(*p, *q, false);
            if (w && !r.contains(*w)) {
                rep.convex = false;
                rep.witness = *w;
                return rep;
            }
        }
    }
    return rep;
}

}  // namespace udw::geometry
