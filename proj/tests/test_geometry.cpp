#include <cmath>

#include "doctest.h"
#include "udw/geometry.hpp"
#include "udw/rng.hpp"

using namespace udw::geometry;

namespace {

SpacetimePoint pt(double t, std::vector<double> x) { return SpacetimePoint{t, std::move(x)}; }

BoxRegion box(double t0, double t1, std::vector<double> lo, std::vector<double> hi) {
    return BoxRegion::make(pt(t0, std::move(lo)), pt(t1, std::move(hi)));
}

// Independent cone test used by the oracles below.
bool cone(const SpacetimePoint& q, const SpacetimePoint& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.x.size(); ++i) s += (q.x[i] - p.x[i]) * (q.x[i] - p.x[i]);
    return q.t - p.t >= std::sqrt(s);
}

SpacetimePoint random_point(udw::Rng& rng, int d, double scale) {
    SpacetimePoint p{rng.uniform(-scale, scale), std::vector<double>(d - 1)};
    for (double& c : p.x) c = rng.uniform(-scale, scale);
    return p;
}

}  // namespace

TEST_CASE("causal future of points and boxes") {
    CHECK(in_causal_future(pt(1, {0.5, 0, 0}), region_of(pt(0, {0, 0, 0}))));
    CHECK_FALSE(in_causal_future(pt(1, {2, 0, 0}), region_of(pt(0, {0, 0, 0}))));
    CHECK(in_causal_future(pt(1, {1.5, 0, 0}), region_of(box(0, 0, {-1, -1, -1}, {1, 1, 1}))));
    CHECK_FALSE(in_causal_future(pt(0.4, {1.5, 0, 0}), region_of(box(0, 0, {-1, -1, -1}, {1, 1, 1}))));
    CHECK(in_causal_past(pt(-1, {0.5, 0, 0}), region_of(pt(0, {0, 0, 0}))));
    CHECK_THROWS_AS(in_causal_future(pt(1, {0, 0}), region_of(pt(0, {0, 0, 0}))), GeometryError);
}

TEST_CASE("box causal predicate agrees with dense sampling of the box") {
    udw::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + trial % 3;
        SpacetimePoint lo = random_point(rng, d, 1.0), hi = lo;
        hi.t += rng.uniform(0, 0.5);
        for (double& c : hi.x) c += rng.uniform(0, 0.5);
        const BoxRegion b = BoxRegion::make(lo, hi);
        const SpacetimePoint p = random_point(rng, d, 2.0);
        bool sampled = false;
        for (const auto& v : b.vertices()) sampled = sampled || cone(p, v);
        for (int k = 0; k < 4000 && !sampled; ++k) {
            SpacetimePoint q{rng.uniform(lo.t, hi.t), lo.x};
            for (std::size_t i = 0; i < q.x.size(); ++i) q.x[i] = rng.uniform(lo.x[i], hi.x[i]);
            sampled = cone(p, q);
        }
        // Sampling can only under-report membership.
        if (sampled) CHECK(in_causal_future(p, b));
        if (!in_causal_future(p, b)) CHECK_FALSE(sampled);
    }
}

TEST_CASE("transitivity and time reflection for random triples") {
    udw::Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const int d = 2 + i % 3;
        const SpacetimePoint p = random_point(rng, d, 1.0), q = random_point(rng, d, 1.0), r = random_point(rng, d, 1.0);
        if (in_causal_future(q, p) && in_causal_future(r, q)) CHECK(in_causal_future(r, p));
        REQUIRE(in_causal_future(q, region_of(p)) == in_causal_past(reflect(q), region_of(reflect(p))));
    }
}

TEST_CASE("future domain of dependence") {
    const BoxRegion a = box(0, 0, {-2, -2, -2}, {2, 2, 2});
    CHECK(in_future_domain_of_dependence(pt(0, {0, 0, 0}), a));
    CHECK(in_future_domain_of_dependence(pt(1, {0, 0, 0}), a));
    CHECK_FALSE(in_future_domain_of_dependence(pt(2.5, {0, 0, 0}), a));
    CHECK_THROWS_AS(in_future_domain_of_dependence(pt(1, {0, 0, 0}), box(0, 1, {-2, -2, -2}, {2, 2, 2})),
                    GeometryError);

    // Oracle: every past-directed null ray from p reaches t=0 inside A.
    udw::Rng rng(5);
    const SpacetimePoint p = pt(1, {0, 0, 0});
    bool all_enter = true;
    for (int i = 0; i < 2000; ++i) {
        double v[3] = {rng.normal(), rng.normal(), rng.normal()};
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        for (int k = 0; k < 3; ++k) {
            const double hit = p.x[k] - p.t * v[k] / n;
            all_enter = all_enter && hit >= -2.0 && hit <= 2.0;
        }
    }
    CHECK(all_enter);

    for (int i = 0; i < 10000; ++i) {
        const SpacetimePoint q = random_point(rng, 4, 3.0);
        if (q.t < 0) continue;
        if (in_future_domain_of_dependence(q, a)) REQUIRE(in_causal_future(q, region_of(a)));
    }
}

TEST_CASE("future region of knowledge") {
    const auto single = MeasurementRegion::single_box("M", BoxRegion::at(pt(0, {0, 0})));
    const auto plus = future_region_of_knowledge(single);
    CHECK(plus.contains(pt(1, {0.5, 0.5})));
    CHECK_FALSE(plus.contains(pt(1, {1, 1})));

    const auto m = MeasurementRegion::single_box("M", box(0, 1, {-0.3, -0.3, -0.3}, {0.3, 0.3, 0.3}));
    const auto kp = future_region_of_knowledge(m);
    CHECK(kp.contains(pt(2, {0, 0, 0})));
    CHECK_FALSE(kp.contains(pt(0.5, {0, 0, 0})));
    CHECK(past_region_of_knowledge(m).contains(pt(-1, {0, 0, 0})));
    CHECK_FALSE(past_region_of_knowledge(m).contains(pt(0.5, {0, 0, 0})));

    // Oracle for (0.5, 0): no tip-face candidate lies in its causal past.
    udw::Rng rng(9);
    bool found = false;
    for (int i = 0; i < 5000; ++i) {
        const SpacetimePoint c = pt(1, {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});
        found = found || cone(pt(0.5, {0, 0, 0}), c);
    }
    CHECK_FALSE(found);
}

TEST_CASE("P+ is inside J+ and reached only through the tip set") {
    udw::Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + trial % 3;
        std::vector<double> lo(d - 1), hi(d - 1);
        for (int i = 0; i < d - 1; ++i) {
            lo[i] = rng.uniform(-0.5, 0);
            hi[i] = lo[i] + rng.uniform(0.05, 0.5);
        }
        const auto m = MeasurementRegion::with_defaults("M", box(0, rng.uniform(0.1, 1), lo, hi));
        const auto kp = future_region_of_knowledge(m);
        for (int i = 0; i < 400; ++i) {
            const SpacetimePoint p = random_point(rng, d, 2.5);
            if (!kp.contains(p)) continue;
            REQUIRE(in_causal_future(p, m.region()));
            // Some tip lies in the causal past of p.
            bool via_tip = false;
            for (const auto& piece : kp.pieces()) via_tip = via_tip || in_causal_future(p, piece.face);
            REQUIRE(via_tip);
        }
    }
}

TEST_CASE("measurement region defaults") {
    const auto m = MeasurementRegion::with_defaults("A", box(-0.5, 0.5, {-0.1}, {0.1}));
    CHECK(m.output.lo.t == doctest::Approx(0.5));
    CHECK(m.delay.lo.t == doctest::Approx(0.6));
    CHECK(m.delay.lo.x[0] == doctest::Approx(0.0));
    CHECK(m.delay.hi.x[0] == doctest::Approx(0.0));
    // The M_c top face is dominated by M_d, so the tip is the apex.
    const auto kp = future_region_of_knowledge(m);
    CHECK(kp.contains(pt(0.6, {0})));
    CHECK_FALSE(kp.contains(pt(0.55, {0})));
    CHECK_THROWS_AS(MeasurementRegion::with_defaults("B", box(0, 1, {0}, {1}), box(-0.5, -0.5, {0}, {1})),
                    GeometryError);
}

TEST_CASE("classification relative to a measurement") {
    const auto m = MeasurementRegion::single_box("M", box(0, 1, {-0.1, -0.1, -0.1}, {0.1, 0.1, 0.1}));
    CHECK(classify(pt(-5, {0, 0, 0}), m) == Relation::InPMinus);
    CHECK(classify(pt(0, {10, 0, 0}), m) == Relation::Spacelike);
    CHECK(classify(pt(1.05, {0, 0, 0}), m) == Relation::InPPlus);
    CHECK(classify(pt(0.5, {0, 0, 0}), m) == Relation::Interior);

    const auto md = MeasurementRegion::with_defaults("M", box(0, 1, {-0.1, -0.1, -0.1}, {0.1, 0.1, 0.1}));
    CHECK(classify(pt(1.05, {0, 0, 0}), md) == Relation::FutureStrip);
    CHECK(classify(pt(1.3, {0, 0, 0}), md) == Relation::InPPlus);
}

TEST_CASE("two-detector aggregate labels") {
    const auto a = MeasurementRegion::with_defaults("A", box(-0.5, 0.5, {0.9}, {1.1}));
    const auto b = MeasurementRegion::with_defaults("B", box(-0.5, 0.5, {3.9}, {4.1}));
    const std::vector<MeasurementRegion> ms{a, b};
    const std::vector<std::string> labels{"A", "B"};
    CHECK(aggregate_label(classify(pt(0, {2.5}), ms), labels) == "S_AB");
    CHECK(aggregate_label(classify(pt(1, {1}), ms), labels) == "P+_A\\S_B");
    CHECK(aggregate_label(classify(pt(5, {2.5}), ms), labels) == "P+_A∩P+_B");
}

TEST_CASE("measurement partial order") {
    const auto a = MeasurementRegion::single_box("A", box(0, 1, {0, 0}, {1, 1}));
    const auto far = MeasurementRegion::single_box("B", box(0, 1, {5, 5}, {6, 6}));
    CHECK(measurement_partial_order(a, far) == Order::Both);
    const auto later = MeasurementRegion::single_box("B", box(3, 4, {0, 0}, {1, 1}));
    CHECK(measurement_partial_order(a, later) == Order::Before);
    CHECK(measurement_partial_order(later, a) == Order::After);

    // Each box pokes into the other's future: corners enumerate both intersections.
    const auto p = MeasurementRegion::single_box("P", box(0, 3, {0}, {0.1}));
    const auto q = MeasurementRegion::single_box("Q", box(0, 3, {2}, {2.1}));
    CHECK(measurement_partial_order(p, q) == Order::Incomparable);
    CHECK(box_meets_future(p.coupling, q.coupling));
    CHECK(box_meets_future(q.coupling, p.coupling));

    const std::vector<MeasurementRegion> ms{later, far, a};
    const auto ord = causal_order(ms);
    REQUIRE(ord.size() == 3);
    CHECK(ms[ord[0]].label == "A");
    CHECK_THROWS_AS(causal_order({p, q}), GeometryError);
}

TEST_CASE("prescription status examples") {
    const auto origin = MeasurementRegion::single_box("M", BoxRegion::at(pt(0, {0, 0, 0})));
    const auto r1 = prescription_status({pt(0, {-1, 0, 0}), pt(0, {1, 0, 0})}, origin);
    CHECK(r1.status == PrescriptionStatus::ConflictContained);

    const auto offset = MeasurementRegion::single_box("M", BoxRegion::at(pt(0, {0, 1, 0})));
    const auto r2 = prescription_status({pt(0, {-1, 0, 0}), pt(0, {1, 0, 0})}, offset);
    CHECK(r2.status == PrescriptionStatus::ConflictPartial);

    CHECK(prescription_status({pt(5, {0.1, 0, 0}), pt(6, {-0.2, 0, 0})}, origin).status ==
          PrescriptionStatus::P1Inside);
    CHECK(prescription_status({pt(5, {0.1, 0, 0}), pt(0, {3, 0, 0})}, origin).status == PrescriptionStatus::P2);
    CHECK(prescription_status({pt(0, {3, 0, 0})}, origin).status == PrescriptionStatus::P1Outside);

    const auto thick = MeasurementRegion::with_defaults("M", box(0, 1, {-0.1, -0.1, -0.1}, {0.1, 0.1, 0.1}));
    CHECK_THROWS_AS(prescription_status({pt(1.05, {0, 0, 0}), pt(0, {5, 0, 0})}, thick), GeometryError);
}

TEST_CASE("prescription status agrees with a brute-force sampler") {
    udw::Rng rng(77);
    const double horizon = 10.0;
    int disagreements = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + trial % 3;
        const SpacetimePoint mp = random_point(rng, d, 1.0);
        const auto m = MeasurementRegion::single_box("M", BoxRegion::at(mp));
        std::vector<SpacetimePoint> pts;
        while (pts.size() < 2) {
            SpacetimePoint p = random_point(rng, d, 3.0);
            if (classify(p, m) == Relation::Spacelike) pts.push_back(p);
        }
        udw::geometry::PrescriptionOptions opt;
        opt.seed = 100 + trial;
        const auto rep = prescription_status(pts, m, opt);

        const double tmax = std::max(pts[0].t, pts[1].t);
        std::size_t in_all = 0, in_m = 0;
        for (int k = 0; k < 100000; ++k) {
            SpacetimePoint q{rng.uniform(tmax, tmax + horizon), std::vector<double>(d - 1)};
            for (double& c : q.x) c = rng.uniform(-3.0 - horizon - 3.0, 3.0 + horizon + 3.0);
            if (!cone(q, pts[0]) || !cone(q, pts[1])) continue;
            ++in_all;
            if (cone(q, mp)) ++in_m;
        }
        PrescriptionStatus oracle = in_m == 0 ? PrescriptionStatus::P1Outside
                                    : in_m == in_all ? PrescriptionStatus::ConflictContained
                                                     : PrescriptionStatus::ConflictPartial;
        if (in_all > 0 && oracle != rep.status) ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("convexity sampler") {
    const Diamond d1{pt(0, {0, 0}), pt(2, {0, 0})};
    CHECK(is_causally_convex_sampled(RegionSet{{}, {}, {d1}}, 2000, 1).convex);

    const Diamond far{pt(0, {10, 0}), pt(2, {10, 0})};
    const auto two = is_causally_convex_sampled(RegionSet{{}, {}, {d1, far}}, 2000, 2);
    CHECK(two.convex);

    const Diamond above{pt(3, {0, 0}), pt(5, {0, 0})};
    const RegionSet stacked{{}, {}, {d1, above}};
    const auto rep = is_causally_convex_sampled(stacked, 2000, 3);
    CHECK_FALSE(rep.convex);
    REQUIRE(rep.witness.has_value());
    CHECK_FALSE(stacked.contains(*rep.witness));
    // Explicit witness: (2.5, 0) sits between (1, 0) and (4, 0) yet in neither diamond.
    CHECK(stacked.contains(pt(1, {0, 0})));
    CHECK(stacked.contains(pt(4, {0, 0})));
    CHECK_FALSE(stacked.contains(pt(2.5, {0, 0})));
}
