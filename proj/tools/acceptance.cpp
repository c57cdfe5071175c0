#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "udw/commands.hpp"
#include "udw/correlation.hpp"
#include "udw/oracle.hpp"
#include "udw/scenario.hpp"

using namespace udw;
using geometry::BoxRegion;
using geometry::MeasurementRegion;
using geometry::PrescriptionStatus;
using geometry::SpacetimePoint;

namespace {

int failed = 0;

void line(int n, bool ok, const std::string& what) {
    std::printf("criterion %2d: %s  %s\n", n, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string scenario_file(const std::string& name) { return std::string(UDW_SCENARIO_DIR) + "/" + name; }

// Independent J+ test for a box: some q in the box with p.t - q.t >= |p.x - q.x|, best q at the bottom face.
bool in_future_of(const SpacetimePoint& p, const BoxRegion& b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        const double d = std::max({b.lo.x[i] - p.x[i], 0.0, p.x[i] - b.hi.x[i]});
        d2 += d * d;
    }
    const double dt = p.t - b.lo.t;
    return dt >= 0.0 && dt * dt >= d2;
}

bool in_past_of(const SpacetimePoint& p, const BoxRegion& b) {
    SpacetimePoint q{-p.t, p.x};
    BoxRegion r{{-b.hi.t, b.lo.x}, {-b.lo.t, b.hi.x}};
    return in_future_of(q, r);
}

bool in_future_of(const SpacetimePoint& p, const MeasurementRegion& m) {
    for (const auto& b : m.parts())
        if (in_future_of(p, b)) return true;
    return false;
}

bool spacelike_to(const SpacetimePoint& p, const MeasurementRegion& m) {
    for (const auto& b : m.parts())
        if (in_future_of(p, b) || in_past_of(p, b)) return false;
    return true;
}

struct Containment {
    std::size_t samples = 0;
    std::size_t inside = 0;
    bool all_spacelike = true;

    std::string verdict() const {
        if (!all_spacelike || samples == 0) return "none";
        if (inside == samples) return "contained";
        if (inside == 0) return "outside";
        return "partial";
    }
};

// Uniform rejection sampling of ∩ J+(x_i) up to the horizon, tested against J+(M).
Containment containment_oracle(const std::vector<SpacetimePoint>& pts, const MeasurementRegion& m, double horizon,
                               std::size_t samples, std::uint64_t seed) {
    Containment c;
    for (const auto& p : pts) c.all_spacelike = c.all_spacelike && spacelike_to(p, m);
    double t_top = pts[0].t, t_bot = pts[0].t;
    for (const auto& p : pts) {
        t_top = std::max(t_top, p.t);
        t_bot = std::min(t_bot, p.t);
    }
    t_top += horizon;
    const double reach = t_top - t_bot;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(t_bot, t_top);
    std::vector<std::uniform_real_distribution<double>> ux;
    for (std::size_t i = 0; i < pts[0].x.size(); ++i) {
        double lo = pts[0].x[i], hi = pts[0].x[i];
        for (const auto& p : pts) {
            lo = std::min(lo, p.x[i]);
            hi = std::max(hi, p.x[i]);
        }
        ux.emplace_back(lo - reach, hi + reach);
    }
    std::size_t attempts = 0;
    while (c.samples < samples && attempts < 1000 * samples) {
        ++attempts;
        SpacetimePoint q{ut(rng), {}};
        for (auto& d : ux) q.x.push_back(d(rng));
        bool in = true;
        for (const auto& p : pts) in = in && in_future_of(q, BoxRegion{p, p});
        if (!in) continue;
        ++c.samples;
        if (in_future_of(q, m)) ++c.inside;
    }
    return c;
}

std::string status_name(PrescriptionStatus s) { return geometry::to_string(s); }

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;
    const auto def = scenario::default_config();

    // 1
    {
        const auto t0 = clock::now();
        const auto s = scenario::build_scenario(def);
        const double secs = seconds_since(t0);
        double worst = 0.0;
        int steps = 0;
        for (const auto& d : s.detectors) {
            worst = std::max(worst, d.kraus.completeness_residual());
            steps = std::max(steps, d.evolution.steps);
        }
        line(1, worst <= 1e-8 && secs < 10.0 && steps == 400,
             "completeness=" + fmt("%.3e", worst) + " tol=1e-8 steps=" + std::to_string(steps) + " runtime=" + fmt("%.2f", secs) + "s limit=10s");
    }

    // 2-4
    const auto s_def = scenario::build_scenario(def);
    oracle::SeparationOptions so;
    so.seed = def.seed;
    so.generators = def.generators;
    const auto sep = oracle::nine_state_separation_trial(s_def, so);
    const double floor = sep.chain_residual;
    line(2, sep.chain_residual <= 1e-9, "chain residual=" + fmt("%.3e", sep.chain_residual) + " tol=1e-9");
    line(3, sep.compatibility_residual <= 1e-9,
         "compatibility residual=" + fmt("%.3e", sep.compatibility_residual) + " tol=1e-9");
    {
        bool all = !sep.separations.empty();
        for (const auto& [name, v] : sep.separations) all = all && v > 10.0 * floor;
        auto zero = def;
        for (auto& d : zero.detectors) d.spec.coupling = 0.0;
        const auto s0 = scenario::build_scenario(zero);
        bool flagged = true;
        for (const auto& d : s0.detectors) flagged = flagged && oracle::trivial_kraus_detector(d.kraus)[0];
        oracle::SeparationOptions so0 = so;
        so0.a = so0.b = 0;
        const auto neg = oracle::nine_state_separation_trial(s0, so0);
        const bool negative_ok = flagged && neg.report.designed_negative && neg.report.witnesses.empty();
        line(4, all && negative_ok,
             "separations=" + std::to_string(sep.separations.size()) + " min=" + fmt("%.3e", sep.min_separation) +
                 " threshold=10x" + fmt("%.3e", floor) + " lambda0_flagged=" + (flagged ? "1" : "0") +
                 " lambda0_witnesses=" + std::to_string(neg.report.witnesses.size()));
    }

    // 5
    {
        const auto t0 = clock::now();
        const auto r2 = oracle::factorization_lemma_trial(2, 1, 100, 8);
        const auto r3 = oracle::factorization_lemma_trial(3, 2, 100, 8);
        const double secs = seconds_since(t0);
        const std::size_t ok2 = r2.trials - r2.failures, ok3 = r3.trials - r3.failures;
        line(5, r2.trials == 100 && r3.trials == 100 && r2.passed() && r3.passed() && secs < 60.0,
             "d=2 " + std::to_string(ok2) + "/100 d=3 " + std::to_string(ok3) + "/100 runtime=" + fmt("%.2f", secs) +
                 "s limit=60s");
    }

    // 6
    {
        const auto library = state::generator_library(*s_def.field, def.generators);
        double worst = 0.0;
        std::size_t words = 0;
        for (const auto& d : s_def.detectors) {
            std::vector<state::Generator> outside;
            for (const auto& g : library)
                if (geometry::classify(g.support, d.region) == geometry::Relation::Spacelike) outside.push_back(g);
            auto check = [&](const std::vector<state::Generator>& w) {
                worst = std::max(worst, correlation::no_signalling_check(w, s_def, d.spec.label));
                ++words;
            };
            check({});
            for (const auto& g : outside) check({g});
            for (const auto& g : outside)
                for (const auto& h : outside) check({g, h});
        }
        line(6, worst <= 1e-9, "worst=" + fmt("%.3e", worst) + " tol=1e-9 words=" + std::to_string(words));
    }

    // 7
    {
        const auto c = scenario::load_scenario(scenario_file("between.json"));
        const auto s = scenario::build_scenario(c);
        const auto& p = s.field->params();
        const auto m = s.detectors[0].region;
        const std::vector<std::pair<SpacetimePoint, SpacetimePoint>> placements{
            {{0.0, {0.0}}, {0.0, {4.0}}}, {{0.0, {0.0}}, {1.0, {0.0}}}};
        double worst_eq = 0.0, min_diff = INFINITY;
        bool outside = true;
        for (const auto& [x1, x2] : placements) {
            outside = outside && spacelike_to(x1, m) && spacelike_to(x2, m);
            const std::vector<correlation::Insertion> ins{correlation::insertion_at(p, x1),
                                                          correlation::insertion_at(p, x2)};
            const auto vac = correlation::smeared_wightman(s.initial(), ins, *s.field);
            const auto avg = correlation::n_point_algebraic(ins, s, correlation::AlgebraicMode::NonSelectiveAverage);
            const auto sel = correlation::n_point_algebraic(ins, s, correlation::AlgebraicMode::Selective);
            worst_eq = std::max(worst_eq, std::abs(avg.value - vac));
            min_diff = std::min(min_diff, std::abs(sel.value - vac));
        }
        line(7, outside && worst_eq <= 1e-9 && min_diff > 10.0 * floor,
             "nonselective-vacuum=" + fmt("%.3e", worst_eq) + " tol=1e-9 selective-vacuum=" + fmt("%.3e", min_diff) +
                 " threshold=10x" + fmt("%.3e", floor));
    }

    // 8
    {
        struct Case {
            const char* file;
            PrescriptionStatus expect;
            const char* oracle;
        };
        bool ok = true;
        std::string what;
        for (const Case& k : {Case{"between.json", PrescriptionStatus::ConflictContained, "contained"},
                              Case{"offset.json", PrescriptionStatus::ConflictPartial, "partial"}}) {
            const auto c = scenario::load_scenario(scenario_file(k.file));
            const auto m = scenario::measurement_regions(c).at(0);
            for (std::size_t n : {std::size_t{10000}, std::size_t{20000}}) {
                geometry::PrescriptionOptions po;
                po.samples = n;
                po.seed = c.seed;
                po.horizon = c.horizon;
                const auto st = geometry::prescription_status(c.points, m, po).status;
                const auto orc = containment_oracle(c.points, m, c.horizon, n, c.seed + 7);
                ok = ok && st == k.expect && orc.verdict() == k.oracle;
                what += std::string(k.file) + "@" + std::to_string(n) + "=" + status_name(st) + "/" + orc.verdict() +
                        " ";
            }
        }
        line(8, ok, what);
    }

    // 9
    {
        bool ok = true;
        std::string what;
        for (int d : {3, 4}) {
            oracle::GeometryCheckOptions go;
            go.dimension = d;
            go.trials = 100;
            go.convexity_samples = 10000;
            go.seed = def.seed;
            const auto r = oracle::geometry_cross_check(go);
            ok = ok && r.passed() && r.trials == 100 && r.witnesses.empty();
            what += "d=" + std::to_string(d) + " failures=" + std::to_string(r.failures) + "/" +
                    std::to_string(r.trials) + " ";
        }
        const auto opp = oracle::opposite_side_check(100, def.seed);
        ok = ok && opp.passed() && opp.trials == 100;
        what += "d=2 no_bridge=" + std::to_string(opp.trials - opp.failures) + "/100";
        line(9, ok, what);
    }

    // 10
    {
        const auto b = oracle::bell_update_demo(def.seed);
        const bool ok = std::abs(b.before - 2.828427) <= 1e-5 && b.after <= 2.0 + 1e-9 && b.marginal_residual <= 1e-12;
        line(10, ok,
             "before=" + fmt("%.6f", b.before) + " after=" + fmt("%.6f", b.after) +
                 " marginal=" + fmt("%.3e", b.marginal_residual));
    }

    // 11
    {
        bool ok = true;
        std::size_t n = 0;
        std::vector<std::string> files;
        for (const auto& e : std::filesystem::directory_iterator(UDW_SCENARIO_DIR))
            if (e.path().extension() == ".json") files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        commands::Options opt;
        opt.format = commands::Format::Summary;
        for (const auto& f : files) {
            const auto c = scenario::load_scenario(f);
            const auto a = commands::run(c, opt), b = commands::run(c, opt);
            ok = ok && !a.text.empty() && a.text == b.text && a.exit_code == b.exit_code;
            ++n;
        }
        line(11, ok && n > 0, "scenarios=" + std::to_string(n) + " byte-identical reruns");
    }

    std::printf("acceptance: %d failed\n", failed);
    return failed == 0 ? 0 : 1;
}
