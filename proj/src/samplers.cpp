#include "arwp/samplers.hpp"
#include "arwp/parallel.hpp"
#include "arwp/rng.hpp"
#include "arwp/rwpo.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

namespace arwp {

namespace {

void check_step(const ParticleEnsemble& next, const char* who) {
    if (!next.all_finite()) throw DivergenceError(next.iteration, std::string(who) + " produced non-finite particles");
}

ParticleEnsemble successor(const ParticleEnsemble& e) {
    ParticleEnsemble next;
    next.iteration = e.iteration + 1;
    next.ids = e.ids;
    return next;
}

Matrix default_score(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    // T = 0: the kernel collapses onto each particle and only the self term survives
    if (cfg.T == 0.0) return -0.5 * cfg.beta * p.gradient_all(e.positions);
    return rwpo_score(e, p, cfg).scores;
}

RngStream noise_stream(const ParticleEnsemble& e, const SamplerConfig& cfg, Eigen::Index i) {
    return RngStream(cfg.seed, stream_id(StreamPurpose::Noise, e.iteration, e.ids[static_cast<std::size_t>(i)]));
}

}  // namespace

ParticleEnsemble arwp_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg, const ScoreFn& score) {
    cfg.validate();
    e.check();
    Matrix s = score ? score(e) : default_score(e, p, cfg);
    Matrix drift = p.gradient_all(e.positions) + s / cfg.beta;
    double m = cfg.damping.factor(cfg.eta, e.iteration + 1);
    ParticleEnsemble next = successor(e);
    next.momenta = m * e.momenta - cfg.eta * drift;
    next.positions = e.positions + cfg.eta * next.momenta;
    check_step(next, "arwp");
    return next;
}

ParticleEnsemble arwp_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    return arwp_step(e, p, cfg, ScoreFn{});
}

ParticleEnsemble brwp_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg, const ScoreFn& score) {
    cfg.validate();
    e.check();
    Matrix s = score ? score(e) : default_score(e, p, cfg);
    ParticleEnsemble next = successor(e);
    next.positions = e.positions - cfg.eta * (p.gradient_all(e.positions) + s / cfg.beta);
    next.momenta = e.momenta;
    check_step(next, "brwp");
    return next;
}

ParticleEnsemble brwp_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    return brwp_step(e, p, cfg, ScoreFn{});
}

ParticleEnsemble ula_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    cfg.validate();
    e.check();
    ParticleEnsemble next = successor(e);
    next.positions.resize(e.dim(), e.size());
    next.momenta = e.momenta;
    double sd = std::sqrt(2.0 * cfg.eta / cfg.beta);
    parallel_for(e.size(), [&](Eigen::Index i) {
        RngStream rng = noise_stream(e, cfg, i);
        Vector x = e.positions.col(i);
        Vector xi(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) xi(k) = rng.normal();
        next.positions.col(i) = x - cfg.eta * p.gradient(x) + sd * xi;
    });
    check_step(next, "ula");
    return next;
}

double mala_log_acceptance(const Potential& p, const Vector& x, const Vector& y, double eta, double beta) {
    double var4 = 4.0 * eta / beta;
    double fwd = (y - x + eta * p.gradient(x)).squaredNorm() / var4;
    double bwd = (x - y + eta * p.gradient(y)).squaredNorm() / var4;
    return -beta * (p.value(y) - p.value(x)) - bwd + fwd;
}

ParticleEnsemble mala_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    cfg.validate();
    e.check();
    ParticleEnsemble next = successor(e);
    next.positions.resize(e.dim(), e.size());
    next.momenta = e.momenta;
    double sd = std::sqrt(2.0 * cfg.eta / cfg.beta);
    parallel_for(e.size(), [&](Eigen::Index i) {
        RngStream rng = noise_stream(e, cfg, i);
        Vector x = e.positions.col(i);
        Vector y(x.size());
        Vector gx = p.gradient(x);
        for (Eigen::Index k = 0; k < x.size(); ++k) y(k) = x(k) - cfg.eta * gx(k) + sd * rng.normal();
        double log_alpha = mala_log_acceptance(p, x, y, cfg.eta, cfg.beta);
        bool accept = std::isfinite(log_alpha) && (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha);
        next.positions.col(i) = accept ? y : x;
    });
    check_step(next, "mala");
    return next;
}

IlaCoefficients ila_coefficients(double eta, double lipschitz, double friction) {
    if (!(lipschitz > 0.0)) throw ConfigError("ILA needs a positive Lipschitz estimate");
    return {1.0 - friction * eta, eta * eta / lipschitz};
}

ParticleEnsemble ila_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    cfg.validate();
    e.check();
    IlaCoefficients c = ila_coefficients(cfg.eta, cfg.lipschitz, cfg.friction);
    if (c.negative_inertia()) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::cerr << "warning: ILA inertia 1 - friction*eta = " << c.inertia << " is negative\n";
    }
    // displacement form d' = inertia d - tau grad + sqrt(2 (1 - inertia) tau / beta) xi, stored as d / eta
    double h = cfg.eta;
    double kick = h / cfg.lipschitz;
    double sd = std::sqrt(2.0 * cfg.friction * h / (cfg.lipschitz * cfg.beta));
    ParticleEnsemble next = successor(e);
    next.positions.resize(e.dim(), e.size());
    next.momenta.resize(e.dim(), e.size());
    parallel_for(e.size(), [&](Eigen::Index i) {
        RngStream rng = noise_stream(e, cfg, i);
        Vector x = e.positions.col(i);
        Vector v = c.inertia * e.momenta.col(i) - kick * p.gradient(x);
        for (Eigen::Index k = 0; k < x.size(); ++k) v(k) += sd * rng.normal();
        next.momenta.col(i) = v;
        next.positions.col(i) = x + h * v;
    });
    check_step(next, "ila");
    return next;
}

KlmcCoefficients klmc_coefficients(double a, double eta) {
    if (!(a > 0.0)) throw ConfigError("KLMC damping must be positive");
    if (!(eta >= 0.0)) throw ConfigError("KLMC step must be nonnegative");
    KlmcCoefficients k;
    double x = a * eta;
    double em1 = std::expm1(-x);       // e^{-x} - 1
    double em2 = std::expm1(-2.0 * x);  // e^{-2x} - 1
    k.psi0 = std::exp(-x);
    k.psi1 = -em1 / a;
    double c11 = -em2 / (2.0 * a);
    double c12 = em1 * em1 / (2.0 * a * a);
    double c22;
    if (x < 1e-3) {
        // cancellation in the closed forms; Taylor series to O(x^3) relative
        k.psi2 = eta * eta * (0.5 - x / 6.0 + x * x / 24.0);
        c22 = eta * eta * eta * (1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0);
    } else {
        k.psi2 = (x + em1) / (a * a);
        c22 = (2.0 * x - em2 + 4.0 * em1) / (2.0 * a * a * a);
    }
    k.noise_cov << c11, c12, c12, c22;
    return k;
}

ParticleEnsemble klmc_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    cfg.validate();
    e.check();
    if (cfg.damping.kind != DampingKind::Constant) throw ConfigError("KLMC needs constant damping");
    double a = cfg.damping.a;
    KlmcCoefficients c = klmc_coefficients(a, cfg.eta);
    // 2x2 Cholesky of C; the second factor can vanish to rounding for small steps
    double l11 = std::sqrt(c.noise_cov(0, 0));
    double l21 = l11 > 0.0 ? c.noise_cov(0, 1) / l11 : 0.0;
    double l22 = std::sqrt(std::max(c.noise_cov(1, 1) - l21 * l21, 0.0));
    double scale = std::sqrt(2.0 * a / cfg.beta);
    ParticleEnsemble next = successor(e);
    next.positions.resize(e.dim(), e.size());
    next.momenta.resize(e.dim(), e.size());
    parallel_for(e.size(), [&](Eigen::Index i) {
        RngStream rng = noise_stream(e, cfg, i);
        Vector x = e.positions.col(i);
        Vector v = e.momenta.col(i);
        Vector g = p.gradient(x);
        Vector nx(x.size()), nv(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            double z0 = rng.normal(), z1 = rng.normal();
            double u0 = l11 * z0;              // velocity part, variance C11
            double u1 = l21 * z0 + l22 * z1;   // position part, variance C22
            nx(k) = x(k) + c.psi1 * v(k) - c.psi2 * g(k) + scale * u1;
            nv(k) = c.psi0 * v(k) - c.psi1 * g(k) + scale * u0;
        }
        next.positions.col(i) = nx;
        next.momenta.col(i) = nv;
    });
    check_step(next, "klmc");
    return next;
}

SamplerKind parse_sampler(std::string_view name) {
    if (name == "arwp-hb") return SamplerKind::ArwpHeavyBall;
    if (name == "arwp-nesterov") return SamplerKind::ArwpNesterov;
    if (name == "brwp") return SamplerKind::Brwp;
    if (name == "ula") return SamplerKind::Ula;
    if (name == "mala") return SamplerKind::Mala;
    if (name == "ila") return SamplerKind::Ila;
    if (name == "klmc") return SamplerKind::Klmc;
    throw ConfigError("unknown sampler '" + std::string(name) + "'");
}

std::string sampler_name(SamplerKind k) {
    switch (k) {
        case SamplerKind::ArwpHeavyBall: return "arwp-hb";
        case SamplerKind::ArwpNesterov: return "arwp-nesterov";
        case SamplerKind::Brwp: return "brwp";
        case SamplerKind::Ula: return "ula";
        case SamplerKind::Mala: return "mala";
        case SamplerKind::Ila: return "ila";
        case SamplerKind::Klmc: return "klmc";
    }
    return "?";
}

ParticleEnsemble sampler_step(SamplerKind kind, const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg) {
    switch (kind) {
        case SamplerKind::ArwpHeavyBall:
        case SamplerKind::ArwpNesterov: return arwp_step(e, p, cfg);
        case SamplerKind::Brwp: return brwp_step(e, p, cfg);
        case SamplerKind::Ula: return ula_step(e, p, cfg);
        case SamplerKind::Mala: return mala_step(e, p, cfg);
        case SamplerKind::Ila: return ila_step(e, p, cfg);
        case SamplerKind::Klmc: return klmc_step(e, p, cfg);
    }
    throw ConfigError("unknown sampler");
}

}  // namespace arwp
