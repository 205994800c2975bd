#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gplab/construction.hpp"
#include "gplab/intrinsic.hpp"
#include "gplab/random.hpp"
#include "gplab/stats.hpp"
#include "gplab/vecmath.hpp"

namespace gplab {

enum class Model { Binomial, Poisson };

const char* model_name(Model m);
Model parse_model(const std::string& name);

struct ExperimentConfig {
    int d = 2;
    int ell = 1;
    std::vector<long long> n_grid = {1000, 10000, 100000};
    long long reps = 100;
    Model model = Model::Binomial;
    long long n_subspaces = 2000;
    double c1 = 4.0;
    double c2 = 0.1;
    std::uint64_t master_seed = 1;
    std::string out_path;  // empty writes to stdout

    // Command-specific knobs.
    std::vector<double> a_list = {0.05, 0.1, 0.2};
    Vec z_direction;  // defaults to e_1
    long long inner_reps = 200;
    long long cap_samples = 200000;
    long long measure_samples = 20000;
    std::vector<double> y_list = {1.0, 2.0, 3.0};
    std::string save_scaffold_path;
    std::string load_scaffold_path;
};

// Key=value rendering of every field, as printed by --print-config.
std::string render_config(const ExperimentConfig& c);

// Applies `key=value` lines (with '#' comments) from a config file.
// Unknown keys are errors.
void apply_config_file(ExperimentConfig& c, const std::string& path);
void apply_config_line(ExperimentConfig& c, const std::string& key, const std::string& value);

struct ResultRow {
    std::string experiment;
    long long n = 0;
    int d = 0;
    int ell = 0;
    std::string statistic;
    double value = 0.0;
    double std_error = 0.0;
    std::string extra;
};

// Schema: experiment,n,d,ell,statistic,value,std_error,extra with 17
// significant digits and LF line endings.
std::string csv_render(const std::vector<ResultRow>& rows);
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

// Worker pool size: GPLAB_THREADS if set, else hardware concurrency.
int worker_count();

// Runs fn(worker_id, index) for index in [0, count); results must go into
// caller-owned per-index slots. Deterministic regardless of scheduling.
void parallel_run(long long count, const std::function<void(int, long long)>& fn);

// Stream scheduling: replication r at grid index g, plus reserved auxiliary
// lanes per grid index.
inline std::uint64_t replication_stream(std::uint64_t g, std::uint64_t r) {
    return (g << 32) + r;
}
inline std::uint64_t inner_stream(std::uint64_t g, std::uint64_t r) {
    return (g << 32) + 0x40000000ULL + r;
}
inline std::uint64_t aux_stream(std::uint64_t g, std::uint64_t lane) {
    return (g << 32) + 0x80000000ULL + lane;
}
inline constexpr std::uint64_t kAuxSubspaces = 0;
inline constexpr std::uint64_t kAuxScaffold = 1;
inline constexpr std::uint64_t kAuxMeasure = 2;
inline constexpr std::uint64_t kAuxBootstrap = 3;
inline constexpr std::uint64_t kAuxAdmissible = 4;
inline constexpr std::uint64_t kAuxLocalVariance = 5;
inline constexpr std::uint64_t kAuxEvents = 6;

// Per-cloud intrinsic-volume evaluations used by the experiment commands:
// exact volume at ell = d, exact surface at ell = d-1, Kubota MC otherwise
// on a per-grid-point shared subspace sample.
struct EstimatorPlan {
    int d = 0;
    int ell = 0;
    IVMethod method = IVMethod::ExactVolume;
    std::vector<Subspace> shared_subspaces;
};

EstimatorPlan make_estimator_plan(int d, int ell, long long n_subspaces, RandomStream& rs);

struct CloudEval {
    double value = 0.0;
    double mc_std_error = 0.0;
    bool degenerate = false;
};

CloudEval evaluate_cloud(const PointCloud& cloud, const EstimatorPlan& plan,
                         ConvexHullBuilder& builder);

struct RepSample {
    std::vector<double> values;      // per replication, degenerate reps dropped
    long long degenerate_reps = 0;
    double mean_mc_std_error = 0.0;  // mean per-cloud Kubota SE (0 for exact)
};

// reps clouds at grid index g with n points (or Poisson intensity n).
RepSample run_replications(const ExperimentConfig& cfg, size_t g, long long n);

// Distribution-exact tail sampling for d = 2 event audits: the number of
// points with |x| >= r is Binomial(n, exp(-r^2/2)) and, given that count,
// the points are i.i.d. with squared radius r^2 + Exp(mean 2) and uniform
// angle. Event indicators only read those points.
struct TailEventSummary {
    long long reps = 0;
    long long trials = 0;
    std::vector<long long> site_counts;
    long long pooled_count = 0;
};

TailEventSummary tail_event_audit(const Scaffold& scaffold, long long n, long long reps,
                                  RandomStream& rs);

long long binomial_draw(long long n, double p, RandomStream& rs);

// Experiment commands; each returns the CSV rows it would write.
std::vector<ResultRow> cmd_moments(const ExperimentConfig& cfg);
std::vector<ResultRow> cmd_expectation_scaling(const ExperimentConfig& cfg);
std::vector<ResultRow> cmd_variance_scaling(const ExperimentConfig& cfg);
std::vector<ResultRow> cmd_construction_audit(const ExperimentConfig& cfg);
std::vector<ResultRow> cmd_angle_measure(const ExperimentConfig& cfg);
std::vector<ResultRow> cmd_local_variance(const ExperimentConfig& cfg);
std::vector<ResultRow> cmd_lower_bound_audit(const ExperimentConfig& cfg);
std::vector<ResultRow> cmd_clt_diagnostic(const ExperimentConfig& cfg);
std::vector<ResultRow> cmd_concentration_report(const ExperimentConfig& cfg);

// Shared validation (throws ConfigError) plus per-command preconditions.
void validate_config(const ExperimentConfig& cfg, const std::string& command);

// True when at least one grid point of the last construction-style command
// produced usable rows. Commands mark failed grid points with a
// construction_failed row instead of aborting.
bool all_construction_failed(const std::vector<ResultRow>& rows);

}  // namespace gplab
