#include "udw/udw.h"

#include <cstring>
#include <new>
#include <string>

#include "udw/commands.hpp"

struct udw_scenario {
    udw::scenario::ScenarioConfig config;
};

struct udw_options {
    udw::commands::Options opt;
};

struct udw_result {
    udw::commands::Output out;
};

namespace {

thread_local std::string last_error;

udw_status fail(udw_status s, const std::string& what) {
    last_error = what;
    return s;
}

udw_status input_error(const udw::scenario::ScenarioError& e) {
    return fail(UDW_ERR_INPUT, e.what());
}

template <class F>
udw_status guard(F&& f) {
    try {
        return f();
    } catch (const udw::scenario::ScenarioError& e) {
        return input_error(e);
    } catch (const std::invalid_argument& e) {
        return fail(UDW_ERR_INPUT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(UDW_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(UDW_ERR_INTERNAL, e.what());
    }
}

const udw::scenario::ScenarioConfig& config_of(const udw_scenario* s) {
    static const udw::scenario::ScenarioConfig fallback = udw::scenario::default_config();
    return s ? s->config : fallback;
}

const udw::commands::Options& options_of(const udw_options* o) {
    static const udw::commands::Options fallback;
    return o ? o->opt : fallback;
}

udw_status deliver(udw::commands::Output&& out, udw_result** r) {
    const auto code = static_cast<udw_status>(out.exit_code);
    if (!out.error.empty()) last_error = out.error;
    *r = new udw_result{std::move(out)};
    return code;
}

udw_status scenario_from(udw::scenario::ScenarioConfig&& c, udw_scenario** out) {
    *out = new udw_scenario{std::move(c)};
    return UDW_OK;
}

}  // namespace

extern "C" {

const char* udw_version(void) { return "1.0.0"; }

const char* udw_last_error(void) { return last_error.c_str(); }

udw_status udw_scenario_load(const char* path, udw_scenario** out) {
    if (!path || !out) return fail(UDW_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guard([&] { return scenario_from(udw::scenario::load_scenario(path), out); });
}

udw_status udw_scenario_parse(const char* text, udw_scenario** out) {
    if (!text || !out) return fail(UDW_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guard([&] { return scenario_from(udw::scenario::parse_scenario(text), out); });
}

udw_status udw_scenario_default(udw_scenario** out) {
    if (!out) return fail(UDW_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guard([&] { return scenario_from(udw::scenario::default_config(), out); });
}

void udw_scenario_free(udw_scenario* s) { delete s; }

int udw_scenario_dimension(const udw_scenario* s) { return s ? s->config.dimension : 0; }

size_t udw_scenario_detector_count(const udw_scenario* s) { return s ? s->config.detectors.size() : 0; }

udw_status udw_classify_point(const udw_scenario* s, const double* coords, size_t n, char* buf, size_t buflen) {
    if (!s || !coords || !buf || buflen == 0) return fail(UDW_ERR_ARGUMENT, "null argument");
    return guard([&] {
        if (static_cast<int>(n) != s->config.dimension) return fail(UDW_ERR_INPUT, "point dimension differs from the scenario");
        const udw::geometry::SpacetimePoint p{coords[0], std::vector<double>(coords + 1, coords + n)};
        std::vector<udw::geometry::Relation> rel;
        std::vector<std::string> labels;
        for (const auto& m : udw::scenario::measurement_regions(s->config)) {
            rel.push_back(udw::geometry::classify(p, m));
            labels.push_back(m.label);
        }
        const std::string label = udw::geometry::aggregate_label(rel, labels);
        if (label.size() + 1 > buflen) return fail(UDW_ERR_ARGUMENT, "buffer too small");
        std::memcpy(buf, label.c_str(), label.size() + 1);
        return UDW_OK;
    });
}

udw_status udw_options_new(udw_options** out) {
    if (!out) return fail(UDW_ERR_ARGUMENT, "null argument");
    *out = new (std::nothrow) udw_options{};
    return *out ? UDW_OK : fail(UDW_ERR_INTERNAL, "out of memory");
}

void udw_options_free(udw_options* o) { delete o; }

udw_status udw_options_set_seed(udw_options* o, uint64_t seed) {
    if (!o) return fail(UDW_ERR_ARGUMENT, "null options");
    o->opt.seed = seed;
    return UDW_OK;
}

udw_status udw_options_set_samples(udw_options* o, size_t samples) {
    if (!o) return fail(UDW_ERR_ARGUMENT, "null options");
    if (samples == 0) return fail(UDW_ERR_INPUT, "samples must be positive");
    o->opt.samples = samples;
    return UDW_OK;
}

udw_status udw_options_set_tol(udw_options* o, double tol) {
    if (!o) return fail(UDW_ERR_ARGUMENT, "null options");
    if (!(tol > 0.0)) return fail(UDW_ERR_INPUT, "tolerance must be positive");
    o->opt.tol = tol;
    return UDW_OK;
}

udw_status udw_options_set_trials(udw_options* o, size_t trials) {
    if (!o) return fail(UDW_ERR_ARGUMENT, "null options");
    if (trials == 0) return fail(UDW_ERR_INPUT, "trials must be positive");
    o->opt.trials = trials;
    return UDW_OK;
}

udw_status udw_options_set_prescription(udw_options* o, const char* p) {
    if (!o || !p) return fail(UDW_ERR_ARGUMENT, "null argument");
    const std::string v = p;
    if (v != "pgm" && v != "algebraic-selective" && v != "algebraic-nonselective")
        return fail(UDW_ERR_INPUT, "unknown prescription '" + v + "'");
    o->opt.prescription = v;
    return UDW_OK;
}

udw_status udw_options_set_semantics(udw_options* o, const char* s) {
    if (!o || !s) return fail(UDW_ERR_ARGUMENT, "null argument");
    const std::string v = s;
    if (v != "pgm-classes" && v != "algebraic-global") return fail(UDW_ERR_INPUT, "unknown semantics '" + v + "'");
    o->opt.semantics = v;
    return UDW_OK;
}

udw_status udw_options_set_format(udw_options* o, udw_format f) {
    if (!o) return fail(UDW_ERR_ARGUMENT, "null options");
    if (f != UDW_FORMAT_CSV && f != UDW_FORMAT_SUMMARY) return fail(UDW_ERR_INPUT, "unknown format");
    o->opt.format = f == UDW_FORMAT_CSV ? udw::commands::Format::Csv : udw::commands::Format::Summary;
    return UDW_OK;
}

udw_status udw_options_set_conflicts_as_errors(udw_options* o, int on) {
    if (!o) return fail(UDW_ERR_ARGUMENT, "null options");
    o->opt.conflicts_as_errors = on != 0;
    return UDW_OK;
}

udw_status udw_options_set_detector(udw_options* o, const char* label) {
    if (!o || !label) return fail(UDW_ERR_ARGUMENT, "null argument");
    o->opt.detector = label;
    return UDW_OK;
}

udw_status udw_classify(const udw_scenario* s, const char* points_csv, const udw_options* o, udw_result** out) {
    if (!out) return fail(UDW_ERR_ARGUMENT, "null result");
    *out = nullptr;
    return guard([&] {
        return deliver(udw::commands::classify(config_of(s), points_csv ? points_csv : "", options_of(o)), out);
    });
}

udw_status udw_simulate(const udw_scenario* s, const udw_options* o, udw_result** out) {
    if (!out) return fail(UDW_ERR_ARGUMENT, "null result");
    *out = nullptr;
    return guard([&] { return deliver(udw::commands::simulate(config_of(s), options_of(o)), out); });
}

udw_status udw_twopoint(const udw_scenario* s, const char* grid, const char* anchor, const udw_options* o,
                        udw_result** out) {
    if (!out) return fail(UDW_ERR_ARGUMENT, "null result");
    *out = nullptr;
    return guard([&] {
        std::optional<udw::commands::Grid> g;
        std::optional<udw::geometry::SpacetimePoint> a;
        if (grid && *grid) g = udw::commands::parse_grid(grid);
        if (anchor && *anchor) a = udw::commands::parse_point(anchor);
        return deliver(udw::commands::twopoint(config_of(s), g, a, options_of(o)), out);
    });
}

udw_status udw_verify(const char* suite, const udw_scenario* s, const udw_options* o, udw_result** out) {
    if (!suite || !out) return fail(UDW_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guard([&] { return deliver(udw::commands::verify(suite, config_of(s), options_of(o)), out); });
}

udw_status udw_run(const udw_scenario* s, const udw_options* o, udw_result** out) {
    if (!out) return fail(UDW_ERR_ARGUMENT, "null result");
    *out = nullptr;
    return guard([&] { return deliver(udw::commands::run(config_of(s), options_of(o)), out); });
}

const char* udw_result_text(const udw_result* r) { return r ? r->out.text.c_str() : ""; }

const char* udw_result_error(const udw_result* r) { return r ? r->out.error.c_str() : ""; }

int udw_result_exit_code(const udw_result* r) { return r ? r->out.exit_code : UDW_ERR_INTERNAL; }

void udw_result_free(udw_result* r) { delete r; }

}  // extern "C"
