#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "udw/detector.hpp"
#include "udw/geometry.hpp"
#include "udw/lattice.hpp"
#include "udw/state_assignment.hpp"

namespace udw::scenario {

// Schema or value error, located by JSON pointer and (for syntax errors) line/column.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& where, const std::string& what, int line = 0, int column = 0);
    const std::string& where() const { return where_; }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    std::string where_;
    int line_;
    int column_;
};

struct DetectorEntry {
    detector::DetectorSpec spec;
    // Geometry-only scenarios give M_c directly.
    std::optional<geometry::BoxRegion> coupling_region;
};

struct ScenarioConfig {
    std::string name = "default";
    int dimension = 2;
    bool geometry_only = false;
    lattice::LatticeParams lattice;
    std::vector<DetectorEntry> detectors;
    state::MeasurementRecord record;
    std::uint64_t seed = 1;
    std::size_t samples = 10000;
    int steps = 400;
    double equality_tol = 1e-9;
    double completeness_tol = 1e-8;
    double horizon = 10.0;
    state::GeneratorOptions generators;
    std::vector<geometry::SpacetimePoint> points;
};

// Two spacelike detectors A (x = 1) and B (x = 4) on the default lattice, λ = 0.1, ω = 1, cos² T = 1, bump r = 0.1.
ScenarioConfig default_config();

ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_scenario(const std::string& path);

// Measurement regions without running dynamics: given boxes, or the lattice-widened regions.
std::vector<geometry::MeasurementRegion> measurement_regions(const ScenarioConfig& c);

state::Scenario build_scenario(const ScenarioConfig& c);

}  // namespace udw::scenario
