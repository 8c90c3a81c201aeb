// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include "arwp/experiment.hpp"
#include "arwp/gaussian_theory.hpp"
#include "arwp/parallel.hpp"
#include "arwp/rwpo.hpp"
#include "arwp/samplers.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace arwp;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int n, const char* name, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s (%s; %.2fs)\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str(), s);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig preset(const std::string& name) { return load_experiment(std::string(ARWP_PRESETS_DIR) + "/" + name); }

// first recorded iteration after which KL stays within 10 % of its terminal value
std::uint64_t settle_iteration(const ExperimentReport& r) {
    double term = r.rows.back().kl;
    std::uint64_t k = r.rows.back().iteration;
    for (auto it = r.rows.rbegin(); it != r.rows.rend(); ++it) {
        if (std::abs(it->kl - term) > 0.1 * std::abs(term)) break;
        k = it->iteration;
    }
    return k;
}

std::string run_text(const ExperimentReport& r) {
    std::string s = format_metrics_csv(r);
    for (const auto& [it, x] : r.snapshots) s += "#" + std::to_string(it) + "\n" + format_snapshot(x);
    return s;
}

// Lyapunov samples along an RK4 trajectory started from sigma_tilde0 with g = 0
struct Track {
    std::vector<double> t, v;
    std::vector<double> sigma_tilde;
};

Track lyapunov_track(double st0, double T, double a, bool modified, double t_end) {
    const double lam = 1.0, dt = 1e-3;
    CovarianceState s0 = CovarianceState::scalar(rwpo_gaussian_cov_inverse(st0, lam, T));
    auto tr = continuous_cov_flow(s0, Vector::Constant(1, lam), T, a, t_end, dt, 1.0, 10);
    Track out;
    for (const auto& s : tr) {
        double st = rwpo_gaussian_cov(s.sigma(0), lam, T);
        auto L = modified ? lyapunov_F(st, s.g(0), lam, T, a) : lyapunov_E(st, s.g(0), lam, T, a);
        out.t.push_back(s.t);
        out.v.push_back(modified ? L.f_value : L.e_value);
        out.sigma_tilde.push_back(st);
    }
    return out;
}

// largest increase between consecutive samples, relative to the starting value; samples below
// 1e-13 of the start are roundoff and are skipped
double worst_increase(const Track& tr) {
    double v0 = tr.v.front(), worst = -1e300;
    for (std::size_t i = 1; i < tr.v.size() && tr.v[i] > 1e-13 * v0; ++i)
        worst = std::max(worst, (tr.v[i] - tr.v[i - 1]) / v0);
    return worst;
}

}  // namespace

int main() {
    set_thread_count(0);
    const double kS2 = std::numbers::sqrt2;

    criterion(1, "stationary bias of the critical-minimum recursion", [] {
        auto t0 = std::chrono::steady_clock::now();
        auto op = optimal_params(1.0, 1.0, 0.2, OptimalMode::MinCritical);
        double err;
        try {
            auto tr = discrete_cov_flow(CovarianceState::scalar(1.0), Vector::Constant(1, 1.0), 0.2,
                                        DampingSchedule::constant(op.a), op.eta, 500);
            err = std::abs(tr.back().sigma(0) - 0.96);
        } catch (const SingularUpdate&) {
            err = INFINITY;
        }
        double s = seconds_since(t0);
        return Outcome{err < 1e-8 && s < 1.0, fmt("a=%.6g eta=%.6g a*eta=%.6g |sigma_500-0.96|=%.3g, need <1e-8", op.a,
                                                  op.eta, op.a * op.eta, err)};
    });

    criterion(2, "mixing rate on diag(0.1,5), T=0.05", [] {
        auto t0 = std::chrono::steady_clock::now();
        auto op = optimal_params(0.1, 5.0, 0.05, OptimalMode::MinCritical, true);
        Vector lam(2);
        lam << 0.1, 5.0;
        const std::uint64_t K = 3000;
        double worst = 0.0;
        std::string note;
        try {
            CovarianceState init;
            init.sigma = Vector::Ones(2);
            init.g = Vector::Zero(2);
            auto tr = discrete_cov_flow(init, lam, 0.05, DampingSchedule::constant(op.a), op.eta, K);
            for (int d = 0; d < 2; ++d) {
                // least-squares slope of log|sigma_tilde - lambda| over the second half, above roundoff
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                int n = 0;
                for (std::uint64_t k = K / 2; k <= K; ++k) {
                    double st = rwpo_gaussian_cov(tr[k].sigma(d), lam(d), 0.05);
                    double e = std::abs(st - lam(d));
                    if (!std::isfinite(e)) {
                        n = -1;  // the direction blew up
                        break;
                    }
                    if (e < 1e-13 * lam(d)) continue;
                    double x = static_cast<double>(k), y = std::log(e);
                    sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
                }
                if (n < 0) {
                    worst = INFINITY;
                    note += fmt(" (lambda=%g direction overflowed)", lam(d));
                    continue;
                }
                if (n <= 10) continue;  // converged to roundoff before the window
                worst = std::max(worst, std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx)));
            }
        } catch (const SingularUpdate& e) {
            worst = INFINITY;
            note = " (singular update)";
        }
        double s = seconds_since(t0);
        double target = 0.97015;
        return Outcome{std::abs(worst / target - 1.0) < 0.05 && s < 1.0,
                       fmt("fitted contraction %.6g vs %.5f, tolerance 5%%%s", worst, target, note.c_str())};
    });

    criterion(3, "deadbeat linearization", [&] {
        auto s = linearized_update_matrix(1.0, 0.0, 2.0 * kS2, 1.0 / kS2);
        double m = std::max(std::abs(s.update_plus), std::abs(s.update_minus));
        return Outcome{m < 1e-12, fmt("max |eig(I+eta A)| = %.3g", m)};
    });

    criterion(4, "Lyapunov decay at critical damping", [] {
        auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        std::string detail;
        for (double T : {0.0, 0.1}) {
            for (double st0 : {0.5, 4.0}) {
                double kp = 1.0 + T;
                if (st0 * st0 < 2.0 * T / kp) continue;  // outside the hypothesis
                auto tr = lyapunov_track(st0, T, 2.0, false, 40.0);
                double inc = worst_increase(tr);
                // d/dt log E by central differences where E in [1e-10, 1e-9] E0
                double bound = -(1.0 - T) / (1.0 + T), worst = -1e300;
                double v0 = tr.v.front();
                int used = 0;
                for (std::size_t i = 1; i + 1 < tr.v.size(); ++i) {
                    if (tr.v[i] > 1e-9 * v0 || tr.v[i] < 1e-10 * v0) continue;
                    double r = (std::log(tr.v[i + 1]) - std::log(tr.v[i - 1])) / (tr.t[i + 1] - tr.t[i - 1]);
                    worst = std::max(worst, r);
                    ++used;
                }
                bool good = inc <= 0.0 && used > 0 && worst <= bound + 1e-3;
                ok = ok && good;
                detail += fmt("T=%g st0=%g: max rise %.2g, max dlogE/dt %.4g vs %.4g; ", T, st0, inc, worst, bound);
            }
        }
        return Outcome{ok && seconds_since(t0) < 5.0, detail};
    });

    criterion(5, "overdamped Lyapunov decay", [] {
        auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        double worst = -1e300;
        for (double T : {0.0, 0.1})
            for (double st0 : {0.5, 4.0})
                for (double a : {2.0, 3.0, 4.0}) {
                    auto tr = lyapunov_track(st0, T, a, true, 60.0);
                    double inc = worst_increase(tr);
                    worst = std::max(worst, inc);
                    ok = ok && inc <= 0.0;
                }
        return Outcome{ok && seconds_since(t0) < 5.0, fmt("largest relative rise of F between samples %.3g", worst)};
    });

    criterion(6, "particle ARWP with analytic score tracks the recursion", [] {
        auto t0 = std::chrono::steady_clock::now();
        const double lam = 1.0, T = 0.2;
        SamplerConfig c;
        c.T = T;
        c.eta = 0.3;
        c.damping = DampingSchedule::constant(1.0);
        Potential p = QuadraticPotential(Matrix::Constant(1, 1, lam));
        ScoreFn analytic = [&](const ParticleEnsemble& s) -> Matrix {
            return -s.positions / rwpo_gaussian_cov(ensemble_covariance(s)(0, 0), lam, T);
        };
        auto e = init_gaussian_ensemble(Vector::Zero(1), Matrix::Constant(1, 1, 4.0), 10000, 6);
        auto flow = discrete_cov_flow(CovarianceState::scalar(ensemble_covariance(e)(0, 0)), Vector::Constant(1, lam), T,
                                      c.damping, c.eta, 50);
        double worst = 0.0;
        for (int k = 1; k <= 50; ++k) {
            e = arwp_step(e, p, c, analytic);
            worst = std::max(worst, std::abs(ensemble_covariance(e)(0, 0) / flow[static_cast<std::size_t>(k)].sigma(0) - 1.0));
        }
        return Outcome{worst < 1e-2 && seconds_since(t0) < 10.0, fmt("max relative gap %.3g over 50 steps", worst)};
    });

    criterion(7, "RWPO score matches the Gaussian closure", [] {
        auto t0 = std::chrono::steady_clock::now();
        const double lam = 1.0, T = 0.2;
        SamplerConfig c;
        c.T = T;
        c.seed = 7;
        Potential p = QuadraticPotential(Matrix::Constant(1, 1, lam));
        auto e = init_gaussian_ensemble(Vector::Zero(1), Matrix::Identity(1, 1), 10000, 7);
        double st = rwpo_gaussian_cov(ensemble_covariance(e)(0, 0), lam, T);
        Vector logz = log_normalizers(e, p, c);
        Matrix q(1, 4);
        q << -1.0, -0.5, 0.5, 1.0;
        Matrix sc = rwpo_score_at(q, e.positions, logz, p, c);
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(sc(0, i) / (-q(0, i) / st) - 1.0));
        return Outcome{worst < 0.05 && seconds_since(t0) < 30.0, fmt("max relative error %.3g", worst)};
    });

    criterion(8, "phase sweep divergence iff a*eta > 2", [] {
        auto t0 = std::chrono::steady_clock::now();
        std::ifstream in(std::string(ARWP_PRESETS_DIR) + "/phase_sweep.json");
        SweepConfig cfg = parse_sweep(Json::parse(in));
        auto cells = phase_sweep(cfg);
        const std::size_t na = cfg.a_grid.size();
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < cfg.eta_grid.size(); ++r) {
            double ab = 2.0 / cfg.eta_grid[r];
            if (ab > cfg.a_grid.front() && ab < cfg.a_grid.back()) rows.push_back(r);
        }
        if (rows.size() < 10) return Outcome{false, "boundary crosses fewer than 10 rows"};
        int agree = 0, total = 0;
        std::string misses;
        for (int i = 0; i < 10; ++i) {
            std::size_t r = rows[static_cast<std::size_t>(std::llround(i * (rows.size() - 1) / 9.0))];
            double eta = cfg.eta_grid[r];
            std::size_t hi = 0;
            while (hi < na && cfg.a_grid[hi] * eta <= 2.0) ++hi;
            for (std::size_t col : {hi - 1, hi}) {
                const SweepCell& cell = cells[r * na + col];
                bool expect = cell.a * cell.eta > 2.0;
                ++total;
                if (cell.diverged == expect) ++agree;
                else misses += fmt(" a*eta=%.4f", cell.a * cell.eta);
            }
        }
        return Outcome{agree >= 18 && seconds_since(t0) < 30.0,
                       fmt("%d/%d boundary cells agree%s%s", agree, total, misses.empty() ? "" : "; misses:", misses.c_str())};
    });

    criterion(9, "KLMC covariance spectrum", [] {
        double worst = 0.0, gap = 1e300;
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) {
                double lam = 0.13 * std::pow(1.7, i), a = 0.11 * std::pow(1.6, j);
                gap = std::min(gap, std::abs(a * a - 4.0 / lam) / (a * a + 4.0 / lam));
                auto s = klmc_cov_matrix(lam, a);
                Eigen::EigenSolver<Eigen::Matrix3d> es(s.matrix);
                for (auto e : s.eigs) {
                    double best = 1e300;
                    for (int k = 0; k < 3; ++k) best = std::min(best, std::abs(es.eigenvalues()(k) - e));
                    worst = std::max(worst, best / std::max(1.0, std::abs(e)));
                }
            }
        return Outcome{worst < 1e-10, fmt("max deviation %.3g (closest relative discriminant %.3g)", worst, gap)};
    });

    criterion(10, "ARWP rate below the kinetic Langevin rate", [&] {
        TheoryConfig t;
        t.spectra = {{1.0, 5.0}, {1.0, 50.0}, {1.0, 500.0}};
        double tmax = 1.0 / (1.0 + kS2);
        t.T_list = {0.01, 0.1, 0.25, tmax};
        t.a_list = {1.0};
        int ok = 0, n = 0;
        double margin = 1e300;
        for (const auto& r : theory_report(t)) {
            ++n;
            if (r.status == "ok" && r.arwp_rate < r.klmc_rate) ++ok;
            margin = std::min(margin, r.klmc_rate - r.arwp_rate);
        }
        return Outcome{ok == n && n == 12, fmt("%d/%d rows strictly below, smallest margin %.3g", ok, n, margin)};
    });

    ExperimentReport g_hb, g_brwp, gmm, rosen;

    criterion(11, "2D Gaussian KL: ARWP settles before BRWP", [&] {
        auto t0 = std::chrono::steady_clock::now();
        g_hb = run_experiment(preset("gaussian2d_arwp_hb.json"));
        g_brwp = run_experiment(preset("gaussian2d_brwp.json"));
        if (g_hb.diverged || g_brwp.diverged) return Outcome{false, "a run diverged"};
        bool dec = g_hb.rows.back().kl < g_hb.rows.front().kl && g_brwp.rows.back().kl < g_brwp.rows.front().kl;
        auto sa = settle_iteration(g_hb), sb = settle_iteration(g_brwp);
        return Outcome{dec && sa < sb && seconds_since(t0) < 120.0,
                       fmt("ARWP KL %.4g -> %.4g settles at %llu; BRWP KL %.4g -> %.4g settles at %llu",
                           g_hb.rows.front().kl, g_hb.rows.back().kl, (unsigned long long)sa, g_brwp.rows.front().kl,
                           g_brwp.rows.back().kl, (unsigned long long)sb)};
    });

    criterion(12, "GMM: every well populated", [&] {
        auto t0 = std::chrono::steady_clock::now();
        auto cfg = preset("gmm_arwp_hb.json");
        gmm = run_experiment(cfg);
        if (gmm.diverged) return Outcome{false, "diverged"};
        auto pot = make_potential(cfg.potential);
        const auto& mix = std::get<GaussianMixturePotential>(pot.model());
        const Matrix& x = gmm.final_state.positions;
        double least = 1.0;
        std::string detail;
        for (std::size_t w = 0; w < mix.centers().size(); ++w) {
            int in = 0;
            for (Eigen::Index i = 0; i < x.cols(); ++i)
                if ((x.col(i) - mix.centers()[w]).norm() <= 3.0 * std::sqrt(mix.bandwidths()[w])) ++in;
            double frac = static_cast<double>(in) / static_cast<double>(x.cols());
            least = std::min(least, frac);
            detail += fmt("%.2f ", frac);
        }
        bool kl = gmm.rows.back().kl < gmm.rows.front().kl;
        return Outcome{least >= 0.05 && kl && seconds_since(t0) < 120.0,
                       fmt("well fractions %sKL %.4g -> %.4g", detail.c_str(), gmm.rows.front().kl, gmm.rows.back().kl)};
    });

    criterion(13, "Rosenbrock: particles follow the valley and spread", [&] {
        auto t0 = std::chrono::steady_clock::now();
        rosen = run_experiment(preset("rosenbrock_arwp_nesterov.json"));
        if (rosen.diverged) return Outcome{false, "diverged"};
        const Matrix& x = rosen.final_state.positions;
        bool finite = x.allFinite();
        int near = 0;
        for (Eigen::Index i = 0; i < x.cols(); ++i)
            if (std::abs(x(1, i) - x(0, i) * x(0, i)) <= 1.0) ++near;
        double frac = static_cast<double>(near) / static_cast<double>(x.cols());
        auto spread = [](const Matrix& m) { return m.row(0).maxCoeff() - m.row(0).minCoeff(); };
        double s50 = spread(rosen.snapshots.at(50)), s500 = spread(rosen.snapshots.at(500));
        return Outcome{finite && frac >= 0.8 && s500 > s50 && seconds_since(t0) < 120.0,
                       fmt("%.0f%% near the parabola, x-spread %.3g -> %.3g", 100.0 * frac, s50, s500)};
    });

    criterion(14, "determinism across thread counts", [&] {
        std::vector<std::string> names = {"gaussian2d_arwp_hb.json", "gaussian2d_brwp.json", "gmm_arwp_hb.json",
                                          "rosenbrock_arwp_nesterov.json"};
        int same = 0;
        for (const auto& n : names) {
            set_thread_count(1);
            auto a = run_text(run_experiment(preset(n)));
            set_thread_count(8);
            auto b = run_text(run_experiment(preset(n)));
            if (a == b) ++same;
        }
        set_thread_count(0);
        return Outcome{same == 4, fmt("%d/4 runs bit-identical between 1 and 8 threads", same)};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
