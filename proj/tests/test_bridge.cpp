#include "doctest.h"
#include "udw/geometry.hpp"
#include "udw/rng.hpp"

using namespace udw::geometry;

namespace {

SpacetimePoint pt(double t, std::vector<double> x) { return SpacetimePoint{t, std::move(x)}; }

void check_bridge(const RegionSet& r, const SpacetimePoint& x, const SpacetimePoint& y, const MeasurementRegion& m,
                  std::uint64_t seed) {
    REQUIRE_FALSE(r.empty());
    CHECK(r.contains(x));
    CHECK(r.contains(y));
    const auto conv = is_causally_convex_sampled(r, 2000, seed);
    CHECK(conv.convex);
    const RegionSet mr = m.region();
    udw::Rng rng(seed);
    for (const auto& d : r.diamonds) {
        CHECK_FALSE(in_causal_future(d.future, mr));
        CHECK_FALSE(in_causal_past(d.past, mr));
    }
    (void)rng;
}

}  // namespace

TEST_CASE("d=3 spacelike pair threads around a point measurement") {
    const auto m = MeasurementRegion::single_box("M", BoxRegion::at(pt(0, {0, 0})));
    const auto x = pt(0, {-1, 0});
    const auto y = pt(0, {1, 0});
    const RegionSet r = causally_convex_bridge(x, y, m);
    check_bridge(r, x, y, m, 4);
    bool detours = false;
    for (const auto& d : r.diamonds) detours = detours || std::abs(0.5 * (d.past.x[1] + d.future.x[1])) > 0.2;
    CHECK(detours);
}

TEST_CASE("d=2 opposite sides has no bridge") {
    const auto m = MeasurementRegion::single_box("M", BoxRegion::at(pt(0, {0})));
    try {
        causally_convex_bridge(pt(0, {-1}), pt(0, {1}), m);
        FAIL("expected NoBridge");
    } catch (const GeometryError& e) {
        CHECK(e.code() == GeometryErrc::NoBridge);
    }
    // Same side works.
    const auto x = pt(0, {1});
    const auto y = pt(0.3, {2});
    check_bridge(causally_convex_bridge(x, y, m), x, y, m, 2);
}

TEST_CASE("timelike pair gets a single diamond") {
    const auto m = MeasurementRegion::single_box("M", BoxRegion::make(pt(0, {-0.1, -0.1}), pt(1, {0.1, 0.1})));
    const auto x = pt(0, {3, 0});
    const auto y = pt(1.5, {3.2, 0.1});
    const RegionSet r = causally_convex_bridge(x, y, m);
    CHECK(r.diamonds.size() == 1);
    check_bridge(r, x, y, m, 5);
}

TEST_CASE("boosted spacelike pair in d=4") {
    const auto m = MeasurementRegion::with_defaults("M", BoxRegion::make(pt(0, {-0.2, -0.2, -0.2}), pt(0.5, {0.2, 0.2, 0.2})));
    const auto x = pt(0.2, {-2, 0.1, 0});
    const auto y = pt(0.9, {2, -0.1, 0.05});
    const RegionSet r = causally_convex_bridge(x, y, m);
    check_bridge(r, x, y, m, 6);
}

TEST_CASE("safe diamond avoids the shadow") {
    const RegionSet q = region_of(pt(0, {0, 0}));
    const Diamond d = safe_diamond(pt(0, {1, 0}), q);
    CHECK(d.contains(pt(0, {1, 0})));
    CHECK_FALSE(in_causal_future(d.future, q));
    CHECK_FALSE(in_causal_past(d.past, q));
    CHECK(causal_margin(pt(0, {1, 0}), q) == doctest::Approx(1.0).epsilon(1e-9));
}
