#include "arwp/experiment.hpp"
#include "arwp/gaussian_theory.hpp"
#include "arwp/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace arwp {

namespace {

void check_keys(const Json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
}

double num(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    return j[key].get<double>();
}

std::uint64_t count(const Json& j, const char* key, std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
        throw ConfigError(std::string(key) + " must be a nonnegative integer");
    return j[key].get<std::uint64_t>();
}

Vector to_vector(const Json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a nonempty array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(std::string(what) + " entries must be numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Matrix to_matrix(const Json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a nonempty array of rows");
    Eigen::Index r = static_cast<Eigen::Index>(j.size());
    Eigen::Index c = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        Vector row = to_vector(j[static_cast<std::size_t>(i)], what);
        if (row.size() != c) throw ConfigError(std::string(what) + " rows differ in length");
        m.row(i) = row.transpose();
    }
    return m;
}

Json from_vector(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json from_matrix(const Matrix& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(from_vector(m.row(i).transpose()));
    return a;
}

Json normalize_potential(const Json& j) {
    check_keys(j, "potential", {"name", "covariance", "scale", "centers", "weights", "bandwidths", "dim"});
    if (!j.contains("name") || !j["name"].is_string()) throw ConfigError("potential needs a name");
    std::string name = j["name"];
    Json out;
    out["name"] = name;
    if (name == "quadratic") {
        if (!j.contains("covariance")) throw ConfigError("quadratic potential needs a covariance");
        out["covariance"] = from_matrix(to_matrix(j["covariance"], "covariance"));
    } else if (name == "rosenbrock") {
        out["scale"] = num(j, "scale", 1.0 / 20.0);
    } else if (name == "gmm") {
        GaussianMixturePotential d = GaussianMixturePotential::four_well();
        Json c = Json::array();
        for (const auto& v : d.centers()) c.push_back(from_vector(v));
        out["centers"] = j.contains("centers") ? j["centers"] : c;
        out["weights"] = j.contains("weights") ? j["weights"] : Json(d.weights());
        out["bandwidths"] = j.contains("bandwidths") ? j["bandwidths"] : Json(d.bandwidths());
    } else if (name == "zero") {
        out["dim"] = count(j, "dim", 1);
    } else {
        throw ConfigError("unknown potential '" + name + "'");
    }
    return out;
}

std::string sampler_json_name(const ExperimentConfig& c) { return sampler_name(c.sampler); }

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Potential make_potential(const Json& raw) {
    Json j = normalize_potential(raw);
    std::string name = j["name"];
    if (name == "quadratic") return QuadraticPotential(to_matrix(j["covariance"], "covariance"));
    if (name == "rosenbrock") {
        RosenbrockPotential r;
        r.scale = j["scale"].get<double>();
        return r;
    }
    if (name == "gmm") {
        std::vector<Vector> centers;
        for (const auto& c : j["centers"]) centers.push_back(to_vector(c, "centers"));
        return GaussianMixturePotential(centers, j["weights"].get<std::vector<double>>(),
                                        j["bandwidths"].get<std::vector<double>>());
    }
    return ZeroPotential{static_cast<Eigen::Index>(j["dim"].get<std::uint64_t>())};
}

std::vector<double> parse_grid(const Json& j) {
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& x : j) {
            if (!x.is_number()) throw ConfigError("grid entries must be numbers");
            v.push_back(x.get<double>());
        }
        return v;
    }
    check_keys(j, "grid", {"logspace", "linspace"});
    bool log = j.contains("logspace");
    const Json& s = log ? j["logspace"] : j["linspace"];
    if (!s.is_array() || s.size() != 3) throw ConfigError("grid spec needs [lo, hi, n]");
    double lo = s[0].get<double>(), hi = s[1].get<double>();
    long long n = s[2].get<long long>();
    if (n < 1) throw ConfigError("grid needs n >= 1");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        double t = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        v[static_cast<std::size_t>(i)] = log ? std::pow(10.0, t) : t;
    }
    return v;
}

ExperimentConfig parse_experiment(const Json& j_in) {
    // a report's metadata can be fed back in directly
    const Json& j = j_in.contains("config") && j_in["config"].is_object() ? j_in["config"] : j_in;
    check_keys(j, "experiment",
               {"name", "sampler", "potential", "n_particles", "max_iter", "seed", "init", "metrics", "output_dir"});
    ExperimentConfig c;
    if (j.contains("name")) c.name = j["name"].get<std::string>();

    if (!j.contains("sampler")) throw ConfigError("config needs a sampler");
    const Json& s = j["sampler"];
    check_keys(s, "sampler",
               {"name", "eta", "T", "beta", "a", "mc_samples", "normalizer", "lipschitz", "friction"});
    if (!s.contains("name")) throw ConfigError("sampler needs a name");
    c.sampler = parse_sampler(s["name"].get<std::string>());
    SamplerConfig& sc = c.sampler_cfg;
    sc.eta = num(s, "eta", sc.eta);
    sc.T = num(s, "T", sc.T);
    sc.beta = num(s, "beta", sc.beta);
    sc.mc_samples = static_cast<int>(count(s, "mc_samples", 100));
    sc.lipschitz = num(s, "lipschitz", sc.lipschitz);
    sc.friction = num(s, "friction", sc.friction);
    std::string norm = s.value("normalizer", std::string("monte-carlo"));
    if (norm == "monte-carlo") sc.normalizer = Normalizer::MonteCarlo;
    else if (norm == "laplace") sc.normalizer = Normalizer::Laplace;
    else throw ConfigError("normalizer must be 'monte-carlo' or 'laplace'");
    if (c.sampler == SamplerKind::ArwpNesterov) {
        if (s.contains("a")) throw ConfigError("arwp-nesterov uses the Nesterov schedule; drop 'a'");
        sc.damping = DampingSchedule::nesterov();
    } else {
        sc.damping = DampingSchedule::constant(num(s, "a", 1.0));
    }
    sc.seed = count(j, "seed", 0);
    sc.max_iter = count(j, "max_iter", 100);
    if (sc.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    sc.validate();

    if (!j.contains("potential")) throw ConfigError("config needs a potential");
    c.potential = normalize_potential(j["potential"]);
    Potential pot = make_potential(c.potential);
    Eigen::Index d = pot.dim();

    c.n_particles = static_cast<Eigen::Index>(count(j, "n_particles", 100));
    if (c.n_particles < 1) throw ConfigError("n_particles must be >= 1");
    c.init_mean = Vector::Zero(d);
    c.init_cov = Matrix::Identity(d, d);
    if (j.contains("init")) {
        check_keys(j["init"], "init", {"mean", "cov"});
        if (j["init"].contains("mean")) c.init_mean = to_vector(j["init"]["mean"], "init.mean");
        if (j["init"].contains("cov")) c.init_cov = to_matrix(j["init"]["cov"], "init.cov");
    }
    if (c.init_mean.size() != d || c.init_cov.rows() != d) throw ConfigError("init dimension does not match potential");
    require_spd(c.init_cov, "init.cov");

    if (j.contains("metrics")) {
        const Json& m = j["metrics"];
        check_keys(m, "metrics", {"kl", "trace_error", "snapshots", "record_every"});
        if (m.contains("kl") && !m["kl"].is_null()) {
            const Json& k = m["kl"];
            check_keys(k, "metrics.kl", {"bandwidth", "lo", "hi", "mesh"});
            c.kl.enabled = true;
            c.kl.bandwidth = num(k, "bandwidth", 0.05);
            c.kl.grid.lo = k.contains("lo") ? to_vector(k["lo"], "kl.lo") : Vector::Constant(d, -5.0);
            c.kl.grid.hi = k.contains("hi") ? to_vector(k["hi"], "kl.hi") : Vector::Constant(d, 5.0);
            c.kl.grid.mesh = num(k, "mesh", 0.01);
            c.kl.grid.validate();
            if (c.kl.grid.dim() != d) throw ConfigError("KL grid dimension does not match potential");
            if (!(c.kl.bandwidth > 0.0)) throw ConfigError("KL bandwidth must be positive");
        }
        std::string tr = m.value("trace_error", std::string("none"));
        if (tr == "none") c.trace = TraceReference::None;
        else if (tr == "target") c.trace = TraceReference::Target;
        else if (tr == "stationary") c.trace = TraceReference::Stationary;
        else throw ConfigError("trace_error must be 'none', 'target' or 'stationary'");
        if (c.trace != TraceReference::None && !pot.quadratic())
            throw ConfigError("trace_error needs a quadratic potential");
        if (m.contains("snapshots")) c.snapshots = m["snapshots"].get<std::vector<std::uint64_t>>();
        c.record_every = static_cast<int>(count(m, "record_every", 1));
        if (c.record_every < 1) throw ConfigError("record_every must be >= 1");
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    return c;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["name"] = c.name;
    Json s;
    s["name"] = sampler_json_name(c);
    s["eta"] = c.sampler_cfg.eta;
    s["T"] = c.sampler_cfg.T;
    s["beta"] = c.sampler_cfg.beta;
    if (c.sampler != SamplerKind::ArwpNesterov) s["a"] = c.sampler_cfg.damping.a;
    s["mc_samples"] = c.sampler_cfg.mc_samples;
    s["normalizer"] = c.sampler_cfg.normalizer == Normalizer::Laplace ? "laplace" : "monte-carlo";
    s["lipschitz"] = c.sampler_cfg.lipschitz;
    s["friction"] = c.sampler_cfg.friction;
    j["sampler"] = s;
    j["potential"] = c.potential;
    j["n_particles"] = c.n_particles;
    j["max_iter"] = c.sampler_cfg.max_iter;
    j["seed"] = c.sampler_cfg.seed;
    j["init"] = {{"mean", from_vector(c.init_mean)}, {"cov", from_matrix(c.init_cov)}};
    Json m;
    if (c.kl.enabled)
        m["kl"] = {{"bandwidth", c.kl.bandwidth},
                   {"lo", from_vector(c.kl.grid.lo)},
                   {"hi", from_vector(c.kl.grid.hi)},
                   {"mesh", c.kl.grid.mesh}};
    else
        m["kl"] = nullptr;
    m["trace_error"] = c.trace == TraceReference::None     ? "none"
                       : c.trace == TraceReference::Target ? "target"
                                                           : "stationary";
    m["snapshots"] = c.snapshots;
    m["record_every"] = c.record_every;
    j["metrics"] = m;
    j["output_dir"] = c.output_dir;
    return j;
}

ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return parse_experiment(j);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    rep.config = cfg;
    Potential pot = make_potential(cfg.potential);
    const SamplerConfig& sc = cfg.sampler_cfg;

    std::optional<TargetGrid> target;
    if (cfg.kl.enabled) {
        double beta = sc.beta;
        target = tabulate_target([&](const Vector& x) { return -beta * pot.value(x); }, cfg.kl.grid, true);
        rep.target_box_mass = std::exp(target->log_mass);
    }
    Matrix sigma_star;
    if (cfg.trace != TraceReference::None) {
        const Matrix& lam = pot.quadratic()->lambda();
        Matrix target_cov = lam / sc.beta;
        sigma_star = cfg.trace == TraceReference::Target ? target_cov
                                                         : rwpo_gaussian_cov_inverse(target_cov, lam, sc.T, sc.beta);
    }
    std::set<std::uint64_t> snaps(cfg.snapshots.begin(), cfg.snapshots.end());

    ParticleEnsemble e = init_gaussian_ensemble(cfg.init_mean, cfg.init_cov, cfg.n_particles, sc.seed);
    if (snaps.count(0)) rep.snapshots[0] = e.positions;
    for (std::uint64_t it = 1; it <= sc.max_iter; ++it) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            e = sampler_step(cfg.sampler, e, pot, sc);
        } catch (const DivergenceError& err) {
            rep.diverged = true;
            rep.divergence_iteration = err.iteration();
            rep.divergence_message = err.what();
            break;
        }
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (snaps.count(it)) rep.snapshots[it] = e.positions;
        if (it % static_cast<std::uint64_t>(cfg.record_every) != 0 && it != sc.max_iter) continue;
        MetricRow row{it, NAN, NAN, ms};
        if (target) row.kl = grid_kl(kde_density(e.positions, cfg.kl.bandwidth, cfg.kl.grid), *target);
        if (cfg.trace != TraceReference::None && e.size() >= 2) row.trace_error = trace_error(ensemble_covariance(e), sigma_star);
        rep.rows.push_back(row);
    }
    rep.final_state = e;
    return rep;
}

Json report_metadata(const ExperimentReport& r) {
    Json j;
    j["config"] = to_json(r.config);
    j["seed"] = r.config.sampler_cfg.seed;
    j["version"] = "arwp 0.1.0";
    j["rng"] = "philox4x32-10, streams keyed by (purpose, iteration, particle id)";
    if (r.config.kl.enabled)
        j["kl_target"] = {{"normalization", "renormalized over the grid box"}, {"box_mass_before", r.target_box_mass}};
    j["rows"] = r.rows.size();
    j["diverged"] = r.diverged;
    if (r.diverged) {
        j["divergence_iteration"] = r.divergence_iteration;
        j["divergence_message"] = r.divergence_message;
    }
    return j;
}

std::string format_metrics_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << "iteration,kl,trace_error\n";
    for (const auto& row : r.rows)
        os << row.iteration << ',' << format_double(row.kl) << ',' << format_double(row.trace_error) << '\n';
    return os.str();
}

std::string format_timing_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << "iteration,wallclock_ms\n";
    for (const auto& row : r.rows) os << row.iteration << ',' << format_double(row.wallclock_ms) << '\n';
    return os.str();
}

std::string format_snapshot(const Matrix& x) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        for (Eigen::Index k = 0; k < x.rows(); ++k) os << (k ? " " : "") << format_double(x(k, i));
        os << '\n';
    }
    return os.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << s;
}

constexpr const char* kPlotScript = R"(# usage: python3 plot.py  (run inside this directory)
import csv, glob, matplotlib.pyplot as plt

rows = list(csv.DictReader(open("metrics.csv")))
it = [int(r["iteration"]) for r in rows]
fig, ax = plt.subplots(1, 2, figsize=(10, 4))
for col, a in zip(["kl", "trace_error"], ax):
    y = [float(r[col]) for r in rows]
    if any(v == v for v in y):
        a.semilogy(it, y)
    a.set_xlabel("iteration"); a.set_title(col)
fig.savefig("metrics.png", dpi=120)

for f in sorted(glob.glob("snapshot_*.txt")):
    pts = [list(map(float, l.split())) for l in open(f) if l.strip()]
    if pts and len(pts[0]) == 2:
        plt.figure(figsize=(4, 4))
        plt.scatter([p[0] for p in pts], [p[1] for p in pts], s=4)
        plt.title(f[:-4]); plt.savefig(f[:-4] + ".png", dpi=120); plt.close()
)";

}  // namespace

void write_report(const ExperimentReport& r, const std::string& dir) {
    std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    write_file(d / "metrics.csv", format_metrics_csv(r));
    write_file(d / "timing.csv", format_timing_csv(r));
    write_file(d / "metadata.json", report_metadata(r).dump(2) + "\n");
    for (const auto& [it, x] : r.snapshots) write_file(d / ("snapshot_" + std::to_string(it) + ".txt"), format_snapshot(x));
    write_file(d / "plot.py", kPlotScript);
}

SweepConfig parse_sweep(const Json& j) {
    check_keys(j, "sweep", {"lambda", "T", "a", "eta", "init_sigma", "max_iter", "blowup_factor", "output_dir"});
    SweepConfig c;
    c.lambda = num(j, "lambda", c.lambda);
    c.T = num(j, "T", c.T);
    if (!j.contains("a") || !j.contains("eta")) throw ConfigError("sweep needs 'a' and 'eta' grids");
    c.a_grid = parse_grid(j["a"]);
    c.eta_grid = parse_grid(j["eta"]);
    c.init_sigma = num(j, "init_sigma", c.init_sigma);
    c.max_iter = count(j, "max_iter", c.max_iter);
    c.blowup_factor = num(j, "blowup_factor", c.blowup_factor);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (c.a_grid.empty() || c.eta_grid.empty()) throw ConfigError("sweep grids must be nonempty");
    if (!(c.lambda > 0.0) || !(c.T >= 0.0) || !(c.T < c.lambda)) throw ConfigError("sweep needs 0 <= T < lambda");
    if (!(c.init_sigma > 0.0)) throw ConfigError("init_sigma must be positive");
    for (double a : c.a_grid)
        if (!(a > 0.0)) throw ConfigError("a grid must be positive");
    for (double e : c.eta_grid)
        if (!(e > 0.0)) throw ConfigError("eta grid must be positive");
    return c;
}

Json to_json(const SweepConfig& c) {
    return Json{{"lambda", c.lambda},         {"T", c.T},
                {"a", c.a_grid},              {"eta", c.eta_grid},
                {"init_sigma", c.init_sigma}, {"max_iter", c.max_iter},
                {"blowup_factor", c.blowup_factor}, {"output_dir", c.output_dir}};
}

std::vector<SweepCell> phase_sweep(const SweepConfig& cfg) {
    Vector lam = Vector::Constant(1, cfg.lambda);
    double s_inf = rwpo_gaussian_map(lam, cfg.T).sigma_stationary(0);
    double limit = cfg.blowup_factor * std::max(cfg.init_sigma, s_inf);
    const auto na = static_cast<Eigen::Index>(cfg.a_grid.size());
    std::vector<SweepCell> cells(cfg.a_grid.size() * cfg.eta_grid.size());
    parallel_for(static_cast<Eigen::Index>(cells.size()), [&](Eigen::Index idx) {
        double eta = cfg.eta_grid[static_cast<std::size_t>(idx / na)];
        double a = cfg.a_grid[static_cast<std::size_t>(idx % na)];
        SweepCell cell{a, eta, kDivergedSentinel, false};
        CovarianceState s = CovarianceState::scalar(cfg.init_sigma);
        DampingSchedule damp = DampingSchedule::constant(a);
        try {
            for (std::uint64_t k = 0; k < cfg.max_iter; ++k) {
                s = discrete_cov_step(s, lam, cfg.T, damp, eta, k);
                if (!std::isfinite(s.sigma(0)) || !std::isfinite(s.g(0)) || s.sigma(0) > limit) {
                    cell.diverged = true;
                    break;
                }
            }
        } catch (const SingularUpdate&) {
            cell.diverged = true;
        }
        if (!cell.diverged) cell.error = std::abs(s.sigma(0) - s_inf);
        cells[static_cast<std::size_t>(idx)] = cell;
    });
    return cells;
}

std::string format_sweep_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream os;
    os << "a,eta,error_or_sentinel\n";
    for (const auto& c : cells)
        os << format_double(c.a) << ',' << format_double(c.eta) << ','
           << format_double(c.diverged ? kDivergedSentinel : c.error) << '\n';
    return os.str();
}

TheoryConfig parse_theory(const Json& j) {
    check_keys(j, "theory", {"spectra", "T", "a", "relaxed", "output_dir"});
    TheoryConfig c;
    if (j.contains("spectra")) {
        for (const auto& s : j["spectra"]) {
            if (!s.is_array() || s.size() != 2) throw ConfigError("each spectrum is [lambda_min, lambda_max]");
            c.spectra.emplace_back(s[0].get<double>(), s[1].get<double>());
        }
    }
    if (j.contains("T")) c.T_list = parse_grid(j["T"]);
    if (j.contains("a")) c.a_list = parse_grid(j["a"]);
    c.relaxed = j.value("relaxed", false);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    return c;
}

Json to_json(const TheoryConfig& c) {
    Json spectra = Json::array();
    for (const auto& [lo, hi] : c.spectra) spectra.push_back({lo, hi});
    return Json{{"spectra", spectra}, {"T", c.T_list}, {"a", c.a_list}, {"relaxed", c.relaxed}, {"output_dir", c.output_dir}};
}

std::vector<TheoryRow> theory_report(const TheoryConfig& cfg) {
    std::vector<TheoryRow> rows;
    for (const auto& [lmin, lmax] : cfg.spectra) {
        for (double T : cfg.T_list) {
            for (double a : cfg.a_list) {
                TheoryRow r{lmin, lmax, lmax / lmin, T, a, NAN, NAN, NAN, NAN, NAN, NAN, NAN, "ok"};
                std::vector<std::string> problems;
                if (lmin > 0.0 && lmax >= lmin) r.klmc_rate = std::sqrt(1.0 - lmin / lmax);
                try {
                    r.cts_rate = linearized_rate_cts(lmin, lmax, T, a);
                } catch (const std::exception& e) {
                    problems.push_back(std::string("cts: ") + e.what());
                }
                try {
                    OptimalParams mx = optimal_params(lmin, lmax, T, OptimalMode::MaxCritical, cfg.relaxed);
                    OptimalParams mn = optimal_params(lmin, lmax, T, OptimalMode::MinCritical, cfg.relaxed);
                    r.max_a = mx.a;
                    r.max_eta = mx.eta;
                    r.min_a = mn.a;
                    r.min_eta = mn.eta;
                    r.arwp_rate = mn.rate;
                } catch (const std::exception& e) {
                    problems.push_back(std::string("optimal: ") + e.what());
                }
                if (!problems.empty()) {
                    r.status.clear();
                    for (const auto& p : problems) r.status += (r.status.empty() ? "" : "; ") + p;
                }
                rows.push_back(r);
            }
        }
    }
    return rows;
}

std::string format_theory_csv(const std::vector<TheoryRow>& rows) {
    std::ostringstream os;
    os << "lambda_min,lambda_max,kappa,T,a,cts_rate,max_critical_a,max_critical_eta,min_critical_a,min_critical_eta,"
          "arwp_rate,klmc_rate,status\n";
    for (const auto& r : rows) {
        std::string status = r.status;
        for (char& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';
        os << format_double(r.lambda_min) << ',' << format_double(r.lambda_max) << ',' << format_double(r.kappa) << ','
           << format_double(r.T) << ',' << format_double(r.a) << ',' << format_double(r.cts_rate) << ','
           << format_double(r.max_a) << ',' << format_double(r.max_eta) << ',' << format_double(r.min_a) << ','
           << format_double(r.min_eta) << ',' << format_double(r.arwp_rate) << ',' << format_double(r.klmc_rate) << ','
           << status << '\n';
    }
    return os.str();
}

}  // namespace arwp
