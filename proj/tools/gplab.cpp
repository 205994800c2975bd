// Experiment runner for Gaussian-polytope intrinsic-volume simulations.
//
// One subcommand per experiment; common flags are shared. A plain key=value
// config file (`--config`) supplies defaults that command-line flags
// override. Exit codes: 0 success, 2 configuration error, 3 when every grid
// point of a construction command failed to build.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gplab/errors.hpp"
#include "gplab/experiments.hpp"

namespace {

struct CliState {
    gplab::ExperimentConfig cfg;
    std::string n_grid_str;
    std::string a_list_str;
    std::string z_str;
    std::string y_list_str;
    std::string model_str;
    bool print_config = false;
};

void add_common_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--dim", st.cfg.d, "Ambient dimension d (1..8)");
    cmd->add_option("--ell", st.cfg.ell, "Intrinsic volume index (1..d)");
    cmd->add_option("--n-grid", st.n_grid_str, "Comma list of point counts / intensities");
    cmd->add_option("--reps", st.cfg.reps, "Replications per grid point");
    cmd->add_option("--model", st.model_str, "binomial (fixed n) or poisson (intensity n)");
    cmd->add_option("--subspaces", st.cfg.n_subspaces, "Subspace sample size for Kubota MC");
    cmd->add_option("--c1", st.cfg.c1, "Packing separation constant");
    cmd->add_option("--c2", st.cfg.c2, "Homothety factor in (0,1)");
    cmd->add_option("--seed", st.cfg.master_seed, "Master seed");
    cmd->add_option("--out", st.cfg.out_path, "Output CSV path (default: stdout)");
    cmd->add_flag("--print-config", st.print_config, "Print the effective config and exit");
}

void apply_list_flags(CliState& st) {
    gplab::ExperimentConfig& c = st.cfg;
    if (!st.n_grid_str.empty()) gplab::apply_config_line(c, "n-grid", st.n_grid_str);
    if (!st.a_list_str.empty()) gplab::apply_config_line(c, "a-list", st.a_list_str);
    if (!st.z_str.empty()) gplab::apply_config_line(c, "z", st.z_str);
    if (!st.y_list_str.empty()) gplab::apply_config_line(c, "y-list", st.y_list_str);
    if (!st.model_str.empty()) c.model = gplab::parse_model(st.model_str);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian polytope simulation lab"};
    app.require_subcommand(1);

    CliState st;

    // The config file is applied before flag values land, so flags win.
    std::string config_path;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    }
    try {
        if (!config_path.empty()) gplab::apply_config_file(st.cfg, config_path);
    } catch (const gplab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    std::string config_sink;

    const std::vector<std::string> commands = {
        "moments",         "expectation-scaling", "variance-scaling",
        "construction-audit", "angle-measure",    "local-variance",
        "lower-bound-audit",  "clt-diagnostic",   "concentration-report"};
    for (const std::string& name : commands) {
        CLI::App* cmd = app.add_subcommand(name);
        add_common_flags(cmd, st);
        cmd->add_option("--config", config_sink, "key=value config file");
        if (name == "angle-measure") {
            cmd->add_option("--a-list", st.a_list_str, "Comma list of angles in (0, pi/2)");
            cmd->add_option("--z", st.z_str, "Reference direction (comma list, d coordinates)");
            cmd->add_option("--cap-samples", st.cfg.cap_samples, "Haar samples per angle");
        }
        if (name == "construction-audit") {
            cmd->add_option("--measure-samples", st.cfg.measure_samples,
                            "Importance samples for simplex Gaussian mass");
            cmd->add_option("--save-scaffold", st.cfg.save_scaffold_path,
                            "Write the first grid point's scaffold to this path");
            cmd->add_option("--load-scaffold", st.cfg.load_scaffold_path,
                            "Load scaffold geometry instead of packing");
        }
        if (name == "lower-bound-audit") {
            cmd->add_option("--inner-reps", st.cfg.inner_reps,
                            "Inner resamples of the apex point per event");
        }
        if (name == "concentration-report") {
            cmd->add_option("--y-list", st.y_list_str, "Comma list of deviation multiples");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            return app.exit(e);
        }
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    }

    try {
        apply_list_flags(st);
        if (st.print_config) {
            std::fputs(gplab::render_config(st.cfg).c_str(), stdout);
            return 0;
        }
        const std::string name = app.get_subcommands().front()->get_name();
        std::vector<gplab::ResultRow> rows;
        if (name == "moments") rows = gplab::cmd_moments(st.cfg);
        else if (name == "expectation-scaling") rows = gplab::cmd_expectation_scaling(st.cfg);
        else if (name == "variance-scaling") rows = gplab::cmd_variance_scaling(st.cfg);
        else if (name == "construction-audit") rows = gplab::cmd_construction_audit(st.cfg);
        else if (name == "angle-measure") rows = gplab::cmd_angle_measure(st.cfg);
        else if (name == "local-variance") rows = gplab::cmd_local_variance(st.cfg);
        else if (name == "lower-bound-audit") rows = gplab::cmd_lower_bound_audit(st.cfg);
        else if (name == "clt-diagnostic") rows = gplab::cmd_clt_diagnostic(st.cfg);
        else if (name == "concentration-report") rows = gplab::cmd_concentration_report(st.cfg);
        gplab::write_csv(rows, st.cfg.out_path);
        if (gplab::all_construction_failed(rows)) return 3;
        return 0;
    } catch (const gplab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gplab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
