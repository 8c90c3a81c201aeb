#include "arwp/rwpo.hpp"
#include "arwp/parallel.hpp"

#include <cmath>
#include <vector>

namespace arwp {

double log_normalizer(const Potential& p, const Vector& y, const SamplerConfig& cfg, RngStream& rng) {
    if (cfg.normalizer == Normalizer::Laplace) return -0.5 * cfg.beta * p.value(y);
    if (!(cfg.T > 0.0)) throw ConfigError("Monte Carlo normalizer needs T > 0");
    if (cfg.mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
    double sd = std::sqrt(2.0 * cfg.T / cfg.beta);
    std::vector<double> vals(static_cast<std::size_t>(cfg.mc_samples));
    Vector z(y.size());
    double mx = -INFINITY;
    for (auto& v : vals) {
        for (Eigen::Index k = 0; k < y.size(); ++k) z(k) = y(k) + sd * rng.normal();
        v = -0.5 * cfg.beta * p.value(z);
        mx = std::max(mx, v);
    }
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double v : vals) acc += std::exp(v - mx);
    return mx + std::log(acc / static_cast<double>(vals.size()));
}

Vector log_normalizers(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    Vector out(e.size());
    parallel_for(e.size(), [&](Eigen::Index j) {
        RngStream rng(cfg.seed, stream_id(StreamPurpose::Normalizer, e.iteration, e.ids[static_cast<std::size_t>(j)]));
        out(j) = log_normalizer(p, e.positions.col(j), cfg, rng);
    });
    return out;
}

namespace {

// row of W for the point x, and its softmax
void softmax_row(const Vector& x, const Matrix& positions, const Vector& log_z, double c, Eigen::Ref<Vector> w_row,
                 Eigen::Ref<Vector> s_row) {
    Eigen::Index n = positions.cols();
    double mx = -INFINITY;
    for (Eigen::Index j = 0; j < n; ++j) {
        w_row(j) = -c * (x - positions.col(j)).squaredNorm() - log_z(j);
        mx = std::max(mx, w_row(j));
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        s_row(j) = std::exp(w_row(j) - mx);
        acc += s_row(j);
    }
    s_row /= acc;
}

void require_positive_T(const SamplerConfig& cfg) {
    if (!(cfg.T > 0.0)) throw ConfigError("interaction kernel needs T > 0");
}

}  // namespace

InteractionData interaction_matrix(const ParticleEnsemble& e, const Potential&, const SamplerConfig& cfg,
                                   const Vector& log_z) {
    require_positive_T(cfg);
    Eigen::Index n = e.size();
    if (log_z.size() != n) throw ConfigError("log_z length does not match N");
    InteractionData out{log_z, Matrix(n, n), Matrix(n, n)};
    double c = cfg.beta / (4.0 * cfg.T);
    // rows are built as columns of the transposed matrices to keep writes contiguous
    Matrix wt(n, n), st(n, n);
    parallel_for(n, [&](Eigen::Index i) { softmax_row(e.positions.col(i), e.positions, log_z, c, wt.col(i), st.col(i)); });
    out.w = wt.transpose();
    out.softmax_w = st.transpose();
    return out;
}

Matrix rwpo_score_at(const Matrix& query, const Matrix& positions, const Vector& log_z, const Potential& p,
                     const SamplerConfig& cfg) {
    require_positive_T(cfg);
    Eigen::Index n = positions.cols();
    if (log_z.size() != n) throw ConfigError("log_z length does not match N");
    double c = cfg.beta / (4.0 * cfg.T);
    double k = cfg.beta / (2.0 * cfg.T);
    Matrix out(query.rows(), query.cols());
    parallel_for(query.cols(), [&](Eigen::Index i) {
        Vector w(n), s(n);
        Vector x = query.col(i);
        softmax_row(x, positions, log_z, c, w, s);
        Vector mean = positions * s;
        out.col(i) = -0.5 * cfg.beta * p.gradient(x) - k * (x - mean);
    });
    return out;
}

ScoreField rwpo_score(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    require_positive_T(cfg);
    Vector log_z = log_normalizers(e, p, cfg);
    return {rwpo_score_at(e.positions, e.positions, log_z, p, cfg)};
}

}  // namespace arwp
