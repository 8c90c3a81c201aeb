#pragma once

#include "arwp/core.hpp"
#include "arwp/potentials.hpp"

#include <functional>
#include <string>
#include <string_view>

namespace arwp {

// Replacement for the RWPO score in ARWP/BRWP; returns d x N.
using ScoreFn = std::function<Matrix(const ParticleEnsemble&)>;

ParticleEnsemble arwp_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);
ParticleEnsemble arwp_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg, const ScoreFn& score);
ParticleEnsemble brwp_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);
ParticleEnsemble brwp_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg, const ScoreFn& score);

ParticleEnsemble ula_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);
ParticleEnsemble mala_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);

// log of the Metropolis ratio for moving x -> y under the Langevin proposal
double mala_log_acceptance(const Potential& p, const Vector& x, const Vector& y, double eta, double beta);

struct IlaCoefficients {
    double inertia;  // 1 - friction * eta
    double tau;      // eta^2 / L
    bool negative_inertia() const { return inertia < 0.0; }
};

IlaCoefficients ila_coefficients(double eta, double lipschitz, double friction);

// Momenta hold the velocity (x_{k+1} - x_k) / eta.
ParticleEnsemble ila_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);

struct KlmcCoefficients {
    double psi0 = 1.0, psi1 = 0.0, psi2 = 0.0;
    // covariance of (int psi0, int psi1) against the Brownian increment, per dimension
    Eigen::Matrix2d noise_cov = Eigen::Matrix2d::Zero();
};

KlmcCoefficients klmc_coefficients(double a, double eta);
ParticleEnsemble klmc_step(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);

enum class SamplerKind { ArwpHeavyBall, ArwpNesterov, Brwp, Ula, Mala, Ila, Klmc };

SamplerKind parse_sampler(std::string_view name);
std::string sampler_name(SamplerKind k);

ParticleEnsemble sampler_step(SamplerKind kind, const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);

}  // namespace arwp
