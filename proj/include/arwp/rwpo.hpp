#pragma once

#include "arwp/core.hpp"
#include "arwp/potentials.hpp"
#include "arwp/rng.hpp"

namespace arwp {

struct InteractionData {
    Vector log_z;
    Matrix w;          // W(i, j) = -beta |x_i - x_j|^2 / (4T) - log Z(x_j)
    Matrix softmax_w;  // row-stochastic
};

struct ScoreField {
    Matrix scores;  // d x N
};

// log Z(y) up to a constant shared by every y (the Gaussian prefactor is dropped)
double log_normalizer(const Potential& p, const Vector& y, const SamplerConfig& cfg, RngStream& rng);

// one normalizer per particle; Monte Carlo streams keyed by (iteration, particle id)
Vector log_normalizers(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);

InteractionData interaction_matrix(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg,
                                   const Vector& log_z);

// Score of the proximal density at arbitrary query points (d x M), given particle
// positions and their normalizers. Rows of W are formed on the fly, so large N is fine.
Matrix rwpo_score_at(const Matrix& query, const Matrix& positions, const Vector& log_z, const Potential& p,
                     const SamplerConfig& cfg);

ScoreField rwpo_score(const ParticleEnsemble& e, const Potential& p, const SamplerConfig& cfg);

}  // namespace arwp
