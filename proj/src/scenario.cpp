#include "udw/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace udw::scenario {

using json = nlohmann::json;
using geometry::BoxRegion;
using geometry::SpacetimePoint;

ScenarioError::ScenarioError(const std::string& where, const std::string& what, int line, int column)
    : std::runtime_error([&] {
          std::ostringstream os;
          if (line > 0) os << "line " << line << ", column " << column << ": ";
          if (!where.empty()) os << where << ": ";
          os << what;
          return os.str();
      }()),
      where_(where),
      line_(line),
      column_(column) {}

ScenarioConfig default_config() {
    ScenarioConfig c;
    detector::DetectorSpec a;
    a.label = "A";
    a.position = {1.0};
    detector::DetectorSpec b = a;
    b.label = "B";
    b.position = {4.0};
    c.detectors = {{a, std::nullopt}, {b, std::nullopt}};
    return c;
}

namespace {

class Parser {
public:
    Parser(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    ScenarioConfig parse();

private:
    [[noreturn]] void fail(const std::string& path, const std::string& what) const {
        const int line = locate(path);
        throw ScenarioError(source_ + ":" + (path.empty() ? "/" : path), what, line, line > 0 ? 1 : 0);
    }

    // Best-effort line of a JSON pointer: walk the keys in order through the text.
    int locate(const std::string& path) const {
        std::size_t pos = 0;
        std::istringstream parts(path);
        std::string part;
        std::size_t skip = 0;
        bool found = false;
        while (std::getline(parts, part, '/')) {
            if (part.empty()) continue;
            if (std::all_of(part.begin(), part.end(), ::isdigit)) {
                skip = std::stoul(part);
                continue;
            }
            std::size_t hit = pos;
            for (std::size_t n = 0; n <= skip; ++n) {
                hit = text_.find("\"" + part + "\"", n == 0 ? hit : hit + 1);
                if (hit == std::string::npos) break;
            }
            skip = 0;
            if (hit == std::string::npos) break;
            pos = hit;
            found = true;
        }
        if (!found) return 0;
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }

    void allow(const json& j, const std::string& path, std::initializer_list<const char*> keys) const {
        if (!j.is_object()) fail(path, "expected an object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* k : keys) ok = ok || it.key() == k;
            if (!ok) fail(path + "/" + it.key(), "unknown field");
        }
    }

    double number(const json& j, const std::string& key, const std::string& path, double def) const {
        if (!j.contains(key)) return def;
        if (!j[key].is_number()) fail(path + "/" + key, "expected a number");
        return j[key].get<double>();
    }

    long integer(const json& j, const std::string& key, const std::string& path, long def) const {
        if (!j.contains(key)) return def;
        if (!j[key].is_number_integer()) fail(path + "/" + key, "expected an integer");
        return j[key].get<long>();
    }

    std::string string(const json& j, const std::string& key, const std::string& path, const std::string& def) const {
        if (!j.contains(key)) return def;
        if (!j[key].is_string()) fail(path + "/" + key, "expected a string");
        return j[key].get<std::string>();
    }

    std::vector<double> numbers(const json& j, const std::string& path) const {
        if (!j.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) fail(path + "/" + std::to_string(i), "expected a number");
            out.push_back(j[i].get<double>());
        }
        return out;
    }

    SpacetimePoint point(const json& j, const std::string& path, int dim) const {
        const auto v = numbers(j, path);
        if (static_cast<int>(v.size()) != dim) fail(path, "expected " + std::to_string(dim) + " coordinates (t, x...)");
        return SpacetimePoint{v[0], std::vector<double>(v.begin() + 1, v.end())};
    }

    BoxRegion box(const json& j, const std::string& path, int dim) const {
        allow(j, path, {"lo", "hi"});
        if (!j.contains("lo") || !j.contains("hi")) fail(path, "box needs lo and hi");
        try {
            return BoxRegion::make(point(j["lo"], path + "/lo", dim), point(j["hi"], path + "/hi", dim));
        } catch (const geometry::GeometryError& e) {
            fail(path, e.what());
        }
    }

    quantum::cplx complex(const json& j, const std::string& path) const {
        if (j.is_number()) return j.get<double>();
        const auto v = numbers(j, path);
        if (v.size() != 2) fail(path, "complex numbers are [re, im]");
        return {v[0], v[1]};
    }

    detector::Vec state(const json& j, const std::string& path) const {
        if (!j.is_array() || j.size() != 2) fail(path, "expected two amplitudes");
        detector::Vec v(2);
        for (int i = 0; i < 2; ++i) v(i) = complex(j[i], path + "/" + std::to_string(i));
        return v;
    }

    detector::Mat basis(const json& j, const std::string& path) const {
        detector::Mat m(2, 2);
        if (j.is_string()) {
            const std::string s = j.get<std::string>();
            const double h = 1.0 / std::sqrt(2.0);
            if (s == "computational") m.setIdentity();
            else if (s == "x") m << h, h, h, -h;
            else fail(path, "basis is computational, x, or two column vectors");
            return m;
        }
        if (!j.is_array() || j.size() != 2) fail(path, "basis is computational, x, or two column vectors");
        for (int c = 0; c < 2; ++c) m.col(c) = state(j[c], path + "/" + std::to_string(c));
        return m;
    }

    DetectorEntry detector(const json& j, const std::string& path, int dim) const {
        allow(j, path, {"label", "gap", "coupling", "switching", "smearing", "position", "initial_state", "basis",
                        "coupling_region", "output_region", "delay_region"});
        DetectorEntry e;
        auto& s = e.spec;
        s.label = string(j, "label", path, "");
        if (s.label.empty()) fail(path + "/label", "detector label is required");
        s.gap = number(j, "gap", path, s.gap);
        s.coupling = number(j, "coupling", path, s.coupling);
        if (j.contains("switching")) {
            const auto& w = j["switching"];
            const std::string p = path + "/switching";
            allow(w, p, {"name", "duration", "center"});
            s.switching.name = string(w, "name", p, s.switching.name);
            s.switching.duration = number(w, "duration", p, s.switching.duration);
            s.switching.center = number(w, "center", p, s.switching.center);
        }
        if (j.contains("smearing")) {
            const auto& w = j["smearing"];
            const std::string p = path + "/smearing";
            allow(w, p, {"name", "radius"});
            s.smearing.name = string(w, "name", p, s.smearing.name);
            s.smearing.radius = number(w, "radius", p, s.smearing.radius);
        }
        if (j.contains("position")) s.position = numbers(j["position"], path + "/position");
        else s.position.assign(dim - 1, 0.0);
        if (static_cast<int>(s.position.size()) != dim - 1)
            fail(path + "/position", "expected " + std::to_string(dim - 1) + " spatial coordinates");
        if (j.contains("initial_state")) s.initial_state = state(j["initial_state"], path + "/initial_state");
        if (j.contains("basis")) s.basis = basis(j["basis"], path + "/basis");
        if (j.contains("coupling_region")) e.coupling_region = box(j["coupling_region"], path + "/coupling_region", dim);
        if (j.contains("output_region")) s.output = box(j["output_region"], path + "/output_region", dim);
        if (j.contains("delay_region")) s.delay = box(j["delay_region"], path + "/delay_region", dim);
        try {
            s.validate();
        } catch (const quantum::QuantumError& err) {
            fail(path, err.what());
        }
        return e;
    }

    const std::string& text_;
    std::string source_;
};

ScenarioConfig Parser::parse() {
    json j;
    try {
        j = json::parse(text_);
    } catch (const json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte, text_.size());
        const auto begin = text_.begin(), at = text_.begin() + static_cast<std::ptrdiff_t>(byte);
        const int line = 1 + static_cast<int>(std::count(begin, at, '\n'));
        const auto nl = text_.rfind('\n', byte == 0 ? 0 : byte - 1);
        const int col = static_cast<int>(byte - (nl == std::string::npos || byte == 0 ? 0 : nl + 1));
        throw ScenarioError(source_, "syntax error", line, std::max(col, 1));
    }
    allow(j, "", {"name", "dimension", "geometry_only", "field", "detectors", "record", "seed", "samples", "steps",
                  "tolerances", "horizon", "generators", "points"});
    ScenarioConfig c;
    c.detectors.clear();
    c.name = string(j, "name", "", c.name);
    c.dimension = static_cast<int>(integer(j, "dimension", "", 2));
    if (c.dimension < 2) fail("/dimension", "dimension must be at least 2");
    c.geometry_only = j.value("geometry_only", false);
    if (j.contains("geometry_only") && !j["geometry_only"].is_boolean()) fail("/geometry_only", "expected true or false");
    if (!c.geometry_only && c.dimension != 2) fail("/dimension", "field dynamics requires dimension 2; set geometry_only");

    if (j.contains("field")) {
        const auto& f = j["field"];
        allow(f, "/field", {"mass", "spacing", "sites", "n_max", "dimension_limit", "reference_slot"});
        auto& p = c.lattice;
        p.mass = number(f, "mass", "/field", p.mass);
        p.spacing = number(f, "spacing", "/field", p.spacing);
        p.sites = static_cast<int>(integer(f, "sites", "/field", p.sites));
        p.n_max = static_cast<int>(integer(f, "n_max", "/field", p.n_max));
        p.dimension_limit = static_cast<std::size_t>(integer(f, "dimension_limit", "/field", static_cast<long>(p.dimension_limit)));
        p.reference_slot = static_cast<int>(integer(f, "reference_slot", "/field", p.reference_slot));
        if (!(p.mass > 0.0) || !(p.spacing > 0.0) || p.sites < 1 || p.n_max < 1)
            fail("/field", "need mass > 0, spacing > 0, sites >= 1, n_max >= 1");
    }
    if (!c.geometry_only) {
        try {
            quantum::FockLayout{c.lattice.sites, c.lattice.n_max, c.lattice.dimension_limit}.dim();
        } catch (const quantum::QuantumError& e) {
            fail("/field", e.what());
        }
    }

    if (!j.contains("detectors") || !j["detectors"].is_array()) fail("/detectors", "a detectors array is required");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < j["detectors"].size(); ++i) {
        const std::string p = "/detectors/" + std::to_string(i);
        DetectorEntry e = detector(j["detectors"][i], p, c.dimension);
        if (!labels.insert(e.spec.label).second) fail(p + "/label", "duplicate label " + e.spec.label);
        if (c.geometry_only && !e.coupling_region) fail(p, "geometry-only detectors need a coupling_region");
        if (!c.geometry_only && e.coupling_region)
            fail(p + "/coupling_region", "coupling region is derived from the dynamics; give output/delay only");
        c.detectors.push_back(std::move(e));
    }

    if (j.contains("record")) {
        if (!j["record"].is_array()) fail("/record", "expected an array");
        for (std::size_t i = 0; i < j["record"].size(); ++i) {
            const auto& r = j["record"][i];
            const std::string p = "/record/" + std::to_string(i);
            allow(r, p, {"label", "mode", "outcome"});
            state::RecordEntry e;
            e.label = string(r, "label", p, "");
            if (!labels.count(e.label)) fail(p + "/label", "unknown detector label '" + e.label + "'");
            const std::string mode = string(r, "mode", p, "unknown");
            if (mode == "selective") e.mode = state::Mode::Selective;
            else if (mode == "nonselective") e.mode = state::Mode::NonSelective;
            else if (mode == "not_performed") e.mode = state::Mode::NotPerformed;
            else if (mode == "unknown") e.mode = state::Mode::Unknown;
            else fail(p + "/mode", "mode is selective, nonselective, not_performed or unknown");
            e.outcome = static_cast<int>(integer(r, "outcome", p, 1));
            if (e.outcome < 0 || e.outcome > 1) fail(p + "/outcome", "outcome is 0 or 1");
            if (c.record.find(e.label)) fail(p + "/label", "duplicate record entry " + e.label);
            c.record.entries.push_back(e);
        }
    }

    const long seed = integer(j, "seed", "", 1);
    if (seed < 0) fail("/seed", "seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    const long samples = integer(j, "samples", "", static_cast<long>(c.samples));
    if (samples < 1) fail("/samples", "samples must be positive");
    c.samples = static_cast<std::size_t>(samples);
    c.steps = static_cast<int>(integer(j, "steps", "", c.steps));
    if (c.steps < 1) fail("/steps", "steps must be positive");
    c.horizon = number(j, "horizon", "", c.horizon);
    if (!(c.horizon > 0.0)) fail("/horizon", "horizon must be positive");
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        allow(t, "/tolerances", {"equality", "completeness"});
        c.equality_tol = number(t, "equality", "/tolerances", c.equality_tol);
        c.completeness_tol = number(t, "completeness", "/tolerances", c.completeness_tol);
    }
    if (j.contains("generators")) {
        const auto& g = j["generators"];
        allow(g, "/generators", {"slot_min", "slot_max", "scales", "degree", "half_width", "half_duration"});
        auto& o = c.generators;
        o.slot_min = static_cast<int>(integer(g, "slot_min", "/generators", o.slot_min));
        o.slot_max = static_cast<int>(integer(g, "slot_max", "/generators", o.slot_max));
        o.degree = static_cast<int>(integer(g, "degree", "/generators", o.degree));
        o.half_width = number(g, "half_width", "/generators", o.half_width);
        o.half_duration = number(g, "half_duration", "/generators", o.half_duration);
        if (g.contains("scales")) {
            o.scales.clear();
            for (double s : numbers(g["scales"], "/generators/scales")) o.scales.push_back(static_cast<int>(s));
        }
        if (o.degree < 0 || o.slot_max < o.slot_min) fail("/generators", "need degree >= 0 and slot_min <= slot_max");
    }
    if (j.contains("points")) {
        if (!j["points"].is_array()) fail("/points", "expected an array of points");
        for (std::size_t i = 0; i < j["points"].size(); ++i)
            c.points.push_back(point(j["points"][i], "/points/" + std::to_string(i), c.dimension));
    }
    return c;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
    return Parser(text, source).parse();
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path, "cannot read scenario file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

std::vector<geometry::MeasurementRegion> measurement_regions(const ScenarioConfig& c) {
    std::vector<geometry::MeasurementRegion> out;
    for (const auto& d : c.detectors) {
        if (d.coupling_region) {
            out.push_back(geometry::MeasurementRegion::with_defaults(d.spec.label, *d.coupling_region, d.spec.output,
                                                                     d.spec.delay));
        } else {
            const auto cs = detector::couple_sites(d.spec, c.lattice);
            out.push_back(detector::lattice_measurement_region(d.spec, cs, c.lattice));
        }
    }
    return out;
}

state::Scenario build_scenario(const ScenarioConfig& c) {
    if (c.geometry_only) throw ScenarioError("/geometry_only", "geometry-only scenario has no field dynamics");
    state::Scenario s;
    s.field = std::make_shared<lattice::LatticeField>(c.lattice);
    for (const auto& d : c.detectors) s.detectors.push_back(detector::run_detector(d.spec, *s.field, c.steps, c.completeness_tol));
    s.record = c.record;
    return s;
}

}  // namespace udw::scenario
