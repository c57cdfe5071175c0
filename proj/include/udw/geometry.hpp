#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace udw::geometry {

enum class GeometryErrc {
    DimensionMismatch,
    InvalidRegion,
    NotSliceContained,
    StripPoint,
    NoBridge,
};

class GeometryError : public std::runtime_error {
public:
    GeometryError(GeometryErrc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    GeometryErrc code() const noexcept { return code_; }

private:
    GeometryErrc code_;
};

// Event in d-dimensional Minkowski space, c = 1.
struct SpacetimePoint {
    double t = 0.0;
    std::vector<double> x;

    int dimension() const { return static_cast<int>(x.size()) + 1; }
};

// Closed coordinate-aligned box [lo, hi].
struct BoxRegion {
    SpacetimePoint lo;
    SpacetimePoint hi;

    static BoxRegion make(const SpacetimePoint& lo, const SpacetimePoint& hi);
    static BoxRegion at(const SpacetimePoint& p);

    int dimension() const { return lo.dimension(); }
    bool contains(const SpacetimePoint& p) const;
    bool degenerate_in_time() const { return lo.t == hi.t; }
    SpacetimePoint center() const;
    // 2^d corners (duplicates kept for degenerate axes).
    std::vector<SpacetimePoint> vertices() const;
    // Constant-time face at t = hi.t.
    BoxRegion top_face() const;
    BoxRegion bottom_face() const;
};

// Open causal diamond J+(past) ∩ J-(future) minus its boundary.
struct Diamond {
    SpacetimePoint past;
    SpacetimePoint future;

    bool contains(const SpacetimePoint& p) const;
};

struct RegionSet {
    std::vector<BoxRegion> boxes;
    std::vector<SpacetimePoint> points;
    std::vector<Diamond> diamonds;

    bool empty() const { return boxes.empty() && points.empty() && diamonds.empty(); }
    int dimension() const;
    bool contains(const SpacetimePoint& p) const;
};

RegionSet region_of(const BoxRegion& b);
RegionSet region_of(const SpacetimePoint& p);

// Time reflection t -> -t.
SpacetimePoint reflect(const SpacetimePoint& p);
BoxRegion reflect(const BoxRegion& b);
RegionSet reflect(const RegionSet& r);

double spatial_distance(const std::vector<double>& a, const std::vector<double>& b);
// Euclidean distance from x to the spatial extent of the box.
double spatial_distance(const std::vector<double>& x, const BoxRegion& b);
// Minimal spatial distance between the spatial extents of two boxes.
double spatial_gap(const BoxRegion& a, const BoxRegion& b);

bool in_causal_future(const SpacetimePoint& p, const SpacetimePoint& a);
bool in_causal_future(const SpacetimePoint& p, const BoxRegion& a);
bool in_causal_future(const SpacetimePoint& p, const RegionSet& a);
bool in_causal_past(const SpacetimePoint& p, const SpacetimePoint& a);
bool in_causal_past(const SpacetimePoint& p, const BoxRegion& a);
bool in_causal_past(const SpacetimePoint& p, const RegionSet& a);
bool in_causal_shadow(const SpacetimePoint& p, const RegionSet& a);  // J(A)

bool in_future_domain_of_dependence(const SpacetimePoint& p, const BoxRegion& slice);

// a ∩ J+(b) ≠ ∅
bool box_meets_future(const BoxRegion& a, const BoxRegion& b);
// Every point of a spacelike to every point of b.
bool boxes_spacelike(const BoxRegion& a, const BoxRegion& b);
// a ⊆ J+(b); exact because J+(b) is convex.
bool box_in_future(const BoxRegion& a, const BoxRegion& b);
bool box_in_past(const BoxRegion& a, const BoxRegion& b);

struct MeasurementRegion {
    std::string label;
    BoxRegion coupling;
    BoxRegion output;
    BoxRegion delay;

    // M_c = M_o = M_d collapsed onto one box: the tip set is its top face.
    static MeasurementRegion single_box(const std::string& label, const BoxRegion& box);
    // Fills M_o with the top face of M_c and M_d with the ridge of D+(M_o) when absent.
    static MeasurementRegion with_defaults(const std::string& label, const BoxRegion& coupling,
                                           const std::optional<BoxRegion>& output = std::nullopt,
                                           const std::optional<BoxRegion>& delay = std::nullopt);

    std::vector<BoxRegion> parts() const { return {coupling, output, delay}; }
    RegionSet region() const;
    int dimension() const { return coupling.dimension(); }
    bool contains(const SpacetimePoint& p) const;
    void validate() const;
};

// Ridge of D+(face): the set reached last by the inward light cone over a slice box.
BoxRegion domain_of_dependence_apex(const BoxRegion& slice);

// Membership predicate for P+_M (or P-_M through time reflection).
class KnowledgeRegion {
public:
    struct Piece {
        BoxRegion face;
        struct Exclusion {
            BoxRegion box;
            double reach;
        };
        std::vector<Exclusion> exclusions;
    };

    KnowledgeRegion(std::vector<Piece> pieces, bool past);

    bool contains(const SpacetimePoint& p) const;
    // Exact when the relevant piece carries no exclusions.
    bool contains_box(const BoxRegion& b) const;
    const std::vector<Piece>& pieces() const { return pieces_; }
    bool is_past() const { return past_; }

private:
    bool piece_contains(const Piece& piece, const SpacetimePoint& p) const;
    std::vector<Piece> pieces_;
    bool past_;
};

KnowledgeRegion future_region_of_knowledge(const MeasurementRegion& m);
KnowledgeRegion past_region_of_knowledge(const MeasurementRegion& m);

enum class Relation { Spacelike, InPPlus, InPMinus, FutureStrip, PastStrip, Interior, Mixed };
const char* to_string(Relation r);

Relation classify(const SpacetimePoint& p, const MeasurementRegion& m);
std::vector<Relation> classify(const SpacetimePoint& p, const std::vector<MeasurementRegion>& ms);
// Relation shared by every point of the box, Mixed when there is none.
Relation classify(const BoxRegion& b, const MeasurementRegion& m);
Relation classify(const RegionSet& r, const MeasurementRegion& m);

// Two-detector aggregate labels: S_AB, P+_A\P+_B, P+_B\P+_A, P+_A∩P+_B, ...
std::string aggregate_label(const std::vector<Relation>& rel, const std::vector<std::string>& labels);

enum class Order { Before, After, Both, Incomparable };
const char* to_string(Order o);
Order measurement_partial_order(const MeasurementRegion& a, const MeasurementRegion& b);
// Chronological order under ⪯ with label tie-break; throws InvalidRegion on Incomparable.
std::vector<std::size_t> causal_order(const std::vector<MeasurementRegion>& ms);

enum class PrescriptionStatus { P1Inside, P1Outside, P2, ConflictContained, ConflictPartial };
const char* to_string(PrescriptionStatus s);

struct PrescriptionOptions {
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    // Processing regions are cut at latest point time + horizon.
    double horizon = 10.0;
};

struct PrescriptionReport {
    PrescriptionStatus status = PrescriptionStatus::P1Outside;
    bool exact = false;
    std::size_t samples = 0;
    std::size_t inside_future = 0;
};

PrescriptionReport prescription_status(const std::vector<SpacetimePoint>& points,
                                       const MeasurementRegion& m,
                                       const PrescriptionOptions& opt = {});

// Largest s with p ± s·e_t still outside J±(r): the radius of a diamond around p avoiding J(r).
double causal_margin(const SpacetimePoint& p, const RegionSet& r);
// Open diamond centred at p with half-height causal_margin/2.
Diamond safe_diamond(const SpacetimePoint& p, const RegionSet& r);

struct BridgeOptions {
    // Points sampled along each polyline when measuring the margin.
    std::size_t path_samples = 400;
    std::size_t max_diamonds = 20000;
};

RegionSet causally_convex_bridge(const SpacetimePoint& x, const SpacetimePoint& y,
                                 const MeasurementRegion& m, const BridgeOptions& opt = {});

struct ConvexityReport {
    bool convex = true;
    std::size_t pairs = 0;
    std::optional<SpacetimePoint> witness;
};

ConvexityReport is_causally_convex_sampled(const RegionSet& r, std::size_t n, std::uint64_t seed);

}  // namespace udw::geometry
