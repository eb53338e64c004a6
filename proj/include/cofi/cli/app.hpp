#pragma once

// Needs the vendored CLI11.hpp on the include path.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cofi/cli/commands.hpp"

namespace cofi::cli {

namespace detail {

template <typename T>
void optional_option(CLI::App* app, const std::string& name, std::optional<T>& slot, const std::string& help) {
    app->add_option_function<T>(name, [&slot](const T& v) { slot = v; }, help);
}

inline void constitution_inputs(CLI::App* app, ConstitutionInputs& in) {
    optional_option(app, "--constitution", in.constitution, "Constitution program (.cst)");
    optional_option(app, "--starmap", in.starmap, "StaR Map JSON");
    optional_option(app, "--field", in.field, "Precomputed constitution field JSON (field mode)");
}

}  // namespace detail

/// Parses the command line and runs one subcommand. Diagnostics go to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"cofi: constitutional particle filtering"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cofi 0.1.0");
    bool verbose = false, quiet = false;
    std::optional<std::string> level;
    app.add_flag("-v,--verbose", verbose, "Debug output");
    app.add_flag("-q,--quiet", quiet, "Errors only");
    detail::optional_option(&app, "--log-level", level, "error, warn, info or debug (default: $COFI_LOG_LEVEL or info)");

    IngestOptions ing;
    auto* c_ing = app.add_subcommand("ingest", "AIS CSV to resampled local tracks");
    c_ing->add_option("--csv", ing.csv, "AIS CSV (NOAA columns by default)")->required();
    c_ing->add_option("--out", ing.out, "Track JSON to write")->required();
    c_ing->add_option("--dt", ing.dt, "Resampling step in seconds")->capture_default_str();
    c_ing->add_option("--gap", ing.gap_s, "Split tracks at report gaps longer than this (s)")->capture_default_str();
    detail::optional_option(c_ing, "--origin", ing.origin, "Projection origin 'lat,lon' (default: records center)");
    detail::optional_option(c_ing, "--origin-map", ing.origin_map, "Use the projection origin of this GeoJSON map");
    c_ing->add_option("--column", ing.columns, "Column override field=Header (repeatable)");

    BuildStarmapOptions bsm;
    auto* c_bsm = app.add_subcommand("build-starmap", "Spatial relation moments over a grid");
    c_bsm->add_option("--map", bsm.map, "GeoJSON map")->required();
    c_bsm->add_option("--perturb", bsm.perturb, "Perturbation rules JSON")->required();
    c_bsm->add_option("--grid", bsm.grid, "Grid JSON {bbox, rows, cols}")->required();
    c_bsm->add_option("--samples,-N", bsm.samples, "Map variants per layer")->capture_default_str();
    c_bsm->add_option("--seed", bsm.seed, "Seed of the map variants")->capture_default_str();
    detail::optional_option(c_bsm, "--constitution", bsm.constitution, "Build the layers this program needs");
    c_bsm->add_option("--layer", bsm.relations, "Extra layer relation:tag (repeatable)");
    c_bsm->add_option("--out", bsm.out, "StaR Map JSON to write")->required();
    detail::optional_option(c_bsm, "--pgm-dir", bsm.pgm_dir, "Also write mean/std PGM images here");

    FieldOptions fld;
    auto* c_fld = app.add_subcommand("field", "Constitution probability at every grid cell");
    c_fld->add_option("--constitution", fld.constitution, "Constitution program (.cst)")->required();
    c_fld->add_option("--starmap", fld.starmap, "StaR Map JSON")->required();
    c_fld->add_option("--out", fld.out, "Field JSON to write")->required();
    detail::optional_option(c_fld, "--pgm", fld.pgm, "Also write a PGM image");

    TrackOptions trk;
    auto* c_trk = app.add_subcommand("track", "Run the particle filter over tracks");
    c_trk->add_option("--tracks", trk.tracks, "Track JSON")->required();
    detail::constitution_inputs(c_trk, trk.inputs);
    detail::optional_option(c_trk, "--filter-config", trk.filter_config, "Filter config JSON");
    detail::optional_option(c_trk, "--mode", trk.mode, "direct or field (overrides the config)");
    detail::optional_option(c_trk, "--tau", trk.tau, "Fixed trust ratio in [0, 1]");
    detail::optional_option(c_trk, "--trust-table", trk.trust_table, "Per-bucket trust ratios");
    c_trk->add_flag("--no-constitution", trk.no_constitution, "Plain particle filter");
    c_trk->add_option("--seed", trk.seed, "Master seed")->capture_default_str();
    c_trk->add_option("--out", trk.out, "Step log (JSON Lines) to write")->required();
    detail::optional_option(c_trk, "--summary", trk.summary, "Per-track summary JSON");

    CalibrateOptions cal;
    auto* c_cal = app.add_subcommand("calibrate", "Grid-search the trust ratio per feature bucket");
    c_cal->add_option("--tracks", cal.tracks, "Track JSON")->required();
    detail::constitution_inputs(c_cal, cal.inputs);
    detail::optional_option(c_cal, "--filter-config", cal.filter_config, "Filter config JSON");
    detail::optional_option(c_cal, "--mode", cal.mode, "direct or field (overrides the config)");
    detail::optional_option(c_cal, "--tau-grid", cal.tau_grid, "Comma-separated grid (default 0,0.1,...,1)");
    c_cal->add_option("--default-tau", cal.default_tau, "Trust ratio for unseen buckets")->capture_default_str();
    c_cal->add_option("--seed", cal.seed, "Master seed")->capture_default_str();
    c_cal->add_option("--out", cal.out, "Trust table JSON to write")->required();
    detail::optional_option(c_cal, "--report", cal.report, "Calibration report JSON");
    detail::optional_option(c_cal, "--histogram", cal.histogram, "Chosen-tau histogram CSV");

    BenchOptions bch;
    auto* c_bch = app.add_subcommand("bench", "Synthetic CoFi-vs-baseline ablation");
    c_bch->add_option("--scenario", bch.scenario, "Scenario JSON")->required();
    c_bch->add_option("--out-dir", bch.out_dir, "Directory for metrics.json, per_seed.csv, ...")->required();
    detail::optional_option(c_bch, "--seeds", bch.seeds, "Evaluation agents (overrides the scenario)");
    detail::optional_option(c_bch, "--master-seed", bch.master_seed, "Master seed (overrides the scenario)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUserError;
    }

    LogLevel lvl = LogLevel::Info;
    try {
        lvl = level ? log_level_from_string(*level) : log_level_from_env();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    }
    if (verbose) lvl = LogLevel::Debug;
    if (quiet) lvl = LogLevel::Error;
    const Log log(err, lvl);

    if (c_ing->parsed()) return run_command([&] { cmd_ingest(ing, log); }, log);
    if (c_bsm->parsed()) return run_command([&] { cmd_build_starmap(bsm, log); }, log);
    if (c_fld->parsed()) return run_command([&] { cmd_field(fld, log); }, log);
    if (c_trk->parsed()) return run_command([&] { cmd_track(trk, log); }, log);
    if (c_cal->parsed()) return run_command([&] { cmd_calibrate(cal, log); }, log);
    return run_command([&] { cmd_bench(bch, log); }, log);
}

}  // namespace cofi::cli
