#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "udw/udw.h"

namespace {

using ScenarioPtr = std::unique_ptr<udw_scenario, decltype(&udw_scenario_free)>;
using OptionsPtr = std::unique_ptr<udw_options, decltype(&udw_options_free)>;
using ResultPtr = std::unique_ptr<udw_result, decltype(&udw_result_free)>;

int report_error(const std::string& what) {
    std::cerr << "udwsim: error: " << what << "\n";
    return UDW_ERR_INPUT;
}

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Prints the command output and maps the status onto the process exit code.
template <class F>
int emit(F&& command) {
    udw_result* raw = nullptr;
    const udw_status st = command(&raw);
    ResultPtr r(raw, udw_result_free);
    if (!r) return report_error(udw_last_error());
    std::fwrite(udw_result_text(r.get()), 1, std::char_traits<char>::length(udw_result_text(r.get())), stdout);
    std::fflush(stdout);
    const std::string err = udw_result_error(r.get());
    if (!err.empty()) std::cerr << "udwsim: error: " << err << "\n";
    return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unruh-DeWitt measurement simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples, trials;
    std::optional<double> tol;
    std::string prescription = "pgm", semantics = "pgm-classes", format = "csv";
    app.add_option("--seed", seed, "RNG seed (overrides the scenario)");
    app.add_option("--samples", samples, "Monte-Carlo sample count (overrides the scenario)");
    app.add_option("--tol", tol, "Equality tolerance (overrides the scenario)");
    app.add_option("--prescription", prescription, "Correlation prescription")
        ->check(CLI::IsMember({"pgm", "algebraic-selective", "algebraic-nonselective"}));
    app.add_option("--semantics", semantics, "State-assignment semantics")
        ->check(CLI::IsMember({"pgm-classes", "algebraic-global"}));
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "summary"}));

    std::string scenario_path;
    auto add_scenario = [&](CLI::App* sub) {
        sub->add_option("-s,--scenario", scenario_path, "Scenario file (built-in default when absent)");
    };

    auto* classify = app.add_subcommand("classify", "Classify events against every measurement region");
    std::string points_path;
    classify->add_option("points", points_path, "CSV of events t,x1,...; scenario points when absent");
    add_scenario(classify);

    auto* simulate = app.add_subcommand("simulate", "Evolve all detectors; Kraus norms, probabilities, state residuals");
    add_scenario(simulate);

    auto* twopoint = app.add_subcommand("twopoint", "Smeared two-point functions under a prescription");
    std::string grid, anchor, detector;
    bool conflicts_as_errors = false;
    twopoint->add_option("--grid", grid, "t0:t1:nt,x0:x1:nx");
    twopoint->add_option("--anchor", anchor, "Fixed first insertion t,x");
    twopoint->add_option("--detector", detector, "Measurement the PGM prescription refers to");
    twopoint->add_flag("--conflicts-as-errors", conflicts_as_errors, "Exit 2 when a prescription conflict is flagged");
    add_scenario(twopoint);

    auto* verify = app.add_subcommand("verify", "Run a verification suite");
    std::string suite;
    verify->add_option("suite", suite, "appA | appB | appC | nosignal | bell | trivial-kraus")
        ->required()
        ->check(CLI::IsMember({"appA", "appB", "appC", "nosignal", "bell", "trivial-kraus"}));
    verify->add_option("--trials", trials, "Trials per randomized suite");
    add_scenario(verify);

    auto* scenario = app.add_subcommand("scenario", "Scenario pipeline");
    scenario->require_subcommand(1);
    auto* run = scenario->add_subcommand("run", "Full pipeline with a summary report");
    std::string run_path;
    run->add_option("file", run_path, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return UDW_ERR_INPUT;
    }

    udw_options* raw_opt = nullptr;
    if (udw_options_new(&raw_opt) != UDW_OK) return report_error(udw_last_error());
    OptionsPtr opt(raw_opt, udw_options_free);
    if (seed) udw_options_set_seed(opt.get(), *seed);
    if (samples && udw_options_set_samples(opt.get(), *samples) != UDW_OK) return report_error(udw_last_error());
    if (tol && udw_options_set_tol(opt.get(), *tol) != UDW_OK) return report_error(udw_last_error());
    if (trials && udw_options_set_trials(opt.get(), *trials) != UDW_OK) return report_error(udw_last_error());
    udw_options_set_prescription(opt.get(), prescription.c_str());
    udw_options_set_semantics(opt.get(), semantics.c_str());
    udw_options_set_format(opt.get(), format == "csv" ? UDW_FORMAT_CSV : UDW_FORMAT_SUMMARY);
    udw_options_set_conflicts_as_errors(opt.get(), conflicts_as_errors ? 1 : 0);
    if (!detector.empty()) udw_options_set_detector(opt.get(), detector.c_str());

    const std::string& path = run->parsed() ? run_path : scenario_path;
    udw_scenario* raw_scn = nullptr;
    const udw_status loaded = path.empty() ? udw_scenario_default(&raw_scn) : udw_scenario_load(path.c_str(), &raw_scn);
    if (loaded != UDW_OK) return report_error(udw_last_error());
    ScenarioPtr scn(raw_scn, udw_scenario_free);

    if (classify->parsed()) {
        std::string points;
        if (!points_path.empty()) {
            const auto text = slurp(points_path);
            if (!text) return report_error("cannot read points file " + points_path);
            points = *text;
        }
        return emit([&](udw_result** r) { return udw_classify(scn.get(), points.c_str(), opt.get(), r); });
    }
    if (simulate->parsed()) return emit([&](udw_result** r) { return udw_simulate(scn.get(), opt.get(), r); });
    if (twopoint->parsed())
        return emit([&](udw_result** r) { return udw_twopoint(scn.get(), grid.c_str(), anchor.c_str(), opt.get(), r); });
    if (verify->parsed()) return emit([&](udw_result** r) { return udw_verify(suite.c_str(), scn.get(), opt.get(), r); });
    return emit([&](udw_result** r) { return udw_run(scn.get(), opt.get(), r); });
}
