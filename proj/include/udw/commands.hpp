#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "udw/scenario.hpp"

namespace udw::commands {

enum Exit : int { Ok = 0, InputError = 1, ConflictError = 2, InvariantFailure = 3 };

enum class Format { Csv, Summary };

struct Options {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<double> tol;
    std::string prescription = "pgm";  // pgm | algebraic-selective | algebraic-nonselective
    std::string semantics = "pgm-classes";  // pgm-classes | algebraic-global
    Format format = Format::Csv;
    bool conflicts_as_errors = false;
    // Measurement the PGM prescription refers to; first detector when empty.
    std::string detector;
    std::size_t trials = 100;
};

struct Output {
    std::string text;
    // Diagnostic for stderr; empty on success.
    std::string error;
    int exit_code = Ok;
};

// Inclusive 2D grid over (t, x); n ≥ 1 points per axis.
struct Grid {
    double t0 = 0.0, t1 = 0.0;
    int nt = 1;
    double x0 = 0.0, x1 = 0.0;
    int nx = 1;
};
// "t0:t1:nt,x0:x1:nx"
Grid parse_grid(const std::string& spec);
// "t,x,..."
geometry::SpacetimePoint parse_point(const std::string& spec);

// Seed, sample count and tolerance overrides.
scenario::ScenarioConfig apply_overrides(scenario::ScenarioConfig c, const Options& opt);

Output classify(const scenario::ScenarioConfig& c, const std::string& points_text, const Options& opt);
Output simulate(const scenario::ScenarioConfig& c, const Options& opt);
// Pairs (anchor, g) for every grid point g, or all grid pairs i < j without an anchor.
// With neither grid nor anchor the scenario points are paired.
Output twopoint(const scenario::ScenarioConfig& c, const std::optional<Grid>& grid,
                const std::optional<geometry::SpacetimePoint>& anchor, const Options& opt);
// appA | appB | appC | nosignal | bell | trivial-kraus
Output verify(const std::string& suite, const scenario::ScenarioConfig& c, const Options& opt);
Output run(const scenario::ScenarioConfig& c, const Options& opt);

const std::vector<std::string>& suites();

}  // namespace udw::commands
