#include "arwp/core.hpp"
#include "arwp/rng.hpp"

#include <algorithm>
#include <cmath>

namespace arwp {

ParticleEnsemble::ParticleEnsemble(Matrix x) : positions(std::move(x)) {
    momenta = Matrix::Zero(positions.rows(), positions.cols());
    ids.resize(static_cast<std::size_t>(positions.cols()));
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
}

bool ParticleEnsemble::all_finite() const {
    return positions.allFinite() && momenta.allFinite();
}

void ParticleEnsemble::check() const {
    if (positions.rows() < 1 || positions.cols() < 1)
        throw ConfigError("ensemble must have d >= 1 and N >= 1");
    if (momenta.rows() != positions.rows() || momenta.cols() != positions.cols())
        throw ConfigError("momenta shape does not match positions");
    if (ids.size() != static_cast<std::size_t>(positions.cols()))
        throw ConfigError("particle id count does not match N");
}

double DampingSchedule::factor(double eta, std::uint64_t k) const {
    if (kind == DampingKind::Constant) return 1.0 - a * eta;
    double kk = static_cast<double>(k);
    return std::max((kk - 1.0) / (kk + 2.0), 0.0);
}

void SamplerConfig::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
    if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("T must be nonnegative");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
    if (damping.kind == DampingKind::Constant && !(damping.a > 0.0)) throw ConfigError("damping a must be positive");
    if (mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
    if (!(lipschitz > 0.0)) throw ConfigError("lipschitz estimate must be positive");
    if (!(friction > 0.0)) throw ConfigError("friction must be positive");
}

void require_spd(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InvalidCovariance(std::string(what) + ": not square");
    if (!m.allFinite()) throw InvalidCovariance(std::string(what) + ": non-finite entries");
    double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
        throw InvalidCovariance(std::string(what) + ": not symmetric");
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw InvalidCovariance(std::string(what) + ": not positive definite");
}

ParticleEnsemble init_gaussian_ensemble(const Vector& mean, const Matrix& cov, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("need at least one particle");
    if (cov.rows() != mean.size()) throw InvalidCovariance("covariance and mean dimensions differ");
    require_spd(cov, "initial covariance");
    Matrix L = cov.llt().matrixL();
    Eigen::Index d = mean.size();
    Matrix x(d, n);
    Vector z(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        RngStream rng(seed, stream_id(StreamPurpose::Init, 0, static_cast<std::uint64_t>(i)));
        for (Eigen::Index k = 0; k < d; ++k) z(k) = rng.normal();
        x.col(i) = mean + L * z;
    }
    return ParticleEnsemble(std::move(x));
}

Matrix sample_covariance(const Matrix& x) {
    Eigen::Index n = x.cols();
    if (n < 2) throw ConfigError("covariance needs at least two particles");
    Vector mu = x.rowwise().mean();
    Matrix c = x.colwise() - mu;
    return (c * c.transpose()) / static_cast<double>(n);
}

Matrix ensemble_covariance(const ParticleEnsemble& e) { return sample_covariance(e.positions); }

}  // namespace arwp
