#pragma once

#include "arwp/core.hpp"
#include "arwp/metrics.hpp"
#include "arwp/potentials.hpp"
#include "arwp/samplers.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace arwp {

using Json = nlohmann::ordered_json;

struct KlMetricConfig {
    bool enabled = false;
    double bandwidth = 0.05;
    GridSpec grid;
};

enum class TraceReference { None, Target, Stationary };

struct ExperimentConfig {
    std::string name = "run";
    SamplerKind sampler = SamplerKind::ArwpHeavyBall;
    SamplerConfig sampler_cfg;
    Json potential;
    Eigen::Index n_particles = 100;
    Vector init_mean;
    Matrix init_cov;
    KlMetricConfig kl;
    TraceReference trace = TraceReference::None;
    int record_every = 1;
    std::vector<std::uint64_t> snapshots{10, 50, 200, 500};
    std::string output_dir;
};

ExperimentConfig parse_experiment(const Json& j);
// complete, normalized echo; parse_experiment(to_json(c)) reproduces c
Json to_json(const ExperimentConfig& c);
ExperimentConfig load_experiment(const std::string& path);

Potential make_potential(const Json& j);

struct MetricRow {
    std::uint64_t iteration;
    double kl;
    double trace_error;
    double wallclock_ms;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<MetricRow> rows;
    std::map<std::uint64_t, Matrix> snapshots;
    ParticleEnsemble final_state;
    bool diverged = false;
    std::uint64_t divergence_iteration = 0;
    std::string divergence_message;
    double target_box_mass = 0.0;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

Json report_metadata(const ExperimentReport& r);
// deterministic columns only; wallclock goes to format_timing_csv
std::string format_metrics_csv(const ExperimentReport& r);
std::string format_timing_csv(const ExperimentReport& r);
std::string format_snapshot(const Matrix& positions);
void write_report(const ExperimentReport& r, const std::string& dir);

struct SweepConfig {
    double lambda = 1.0;
    double T = 0.2;
    std::vector<double> a_grid;
    std::vector<double> eta_grid;
    double init_sigma = 4.0;
    std::uint64_t max_iter = 500;
    // a cell diverges if sigma becomes non-finite or exceeds this multiple of max(sigma0, sigma_inf)
    double blowup_factor = 1e8;
    std::string output_dir;
};

struct SweepCell {
    double a;
    double eta;
    double error;  // |sigma_K - sigma_inf|
    bool diverged;
};

constexpr double kDivergedSentinel = -1.0;

SweepConfig parse_sweep(const Json& j);
Json to_json(const SweepConfig& c);
std::vector<SweepCell> phase_sweep(const SweepConfig& cfg);
std::string format_sweep_csv(const std::vector<SweepCell>& cells);

struct TheoryConfig {
    std::vector<std::pair<double, double>> spectra;  // (lambda_min, lambda_max)
    std::vector<double> T_list;
    std::vector<double> a_list;
    bool relaxed = false;
    std::string output_dir;
};

struct TheoryRow {
    double lambda_min, lambda_max, kappa, T, a;
    double cts_rate;
    double max_a, max_eta, min_a, min_eta;
    double arwp_rate, klmc_rate;
    std::string status;
};

TheoryConfig parse_theory(const Json& j);
Json to_json(const TheoryConfig& c);
std::vector<TheoryRow> theory_report(const TheoryConfig& cfg);
std::string format_theory_csv(const std::vector<TheoryRow>& rows);

// numeric list or {"logspace": [lo_exp, hi_exp, n]} / {"linspace": [lo, hi, n]}
std::vector<double> parse_grid(const Json& j);

std::string format_double(double x);

}  // namespace arwp
