#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace arwp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidCovariance : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::uint64_t iteration, const std::string& what)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
    std::uint64_t iteration() const { return iteration_; }

private:
    std::uint64_t iteration_;
};

// Positions and momenta are d x N, one particle per column. ids key the RNG
// streams, so permuting columns together with ids permutes the output.
struct ParticleEnsemble {
    Matrix positions;
    Matrix momenta;
    std::uint64_t iteration = 0;
    std::vector<std::uint64_t> ids;

    ParticleEnsemble() = default;
    explicit ParticleEnsemble(Matrix x);

    Eigen::Index dim() const { return positions.rows(); }
    Eigen::Index size() const { return positions.cols(); }
    bool all_finite() const;
    void check() const;
};

enum class DampingKind { Constant, Nesterov };

struct DampingSchedule {
    DampingKind kind = DampingKind::Constant;
    double a = 1.0;

    static DampingSchedule constant(double a) { return {DampingKind::Constant, a}; }
    static DampingSchedule nesterov() { return {DampingKind::Nesterov, 0.0}; }

    // momentum retention factor used at step k (k = 1 for the first step)
    double factor(double eta, std::uint64_t k) const;
};

enum class Normalizer { MonteCarlo, Laplace };

struct SamplerConfig {
    double eta = 0.1;
    double T = 0.1;
    double beta = 1.0;
    DampingSchedule damping{};
    int mc_samples = 100;
    Normalizer normalizer = Normalizer::MonteCarlo;
    std::uint64_t seed = 0;
    std::uint64_t max_iter = 100;
    // inertial Langevin: Lipschitz estimate L and friction multiplier
    double lipschitz = 1.0;
    double friction = 1.5;

    void validate() const;
};

ParticleEnsemble init_gaussian_ensemble(const Vector& mean, const Matrix& cov, Eigen::Index n, std::uint64_t seed);

// population (1/N) covariance
Matrix ensemble_covariance(const ParticleEnsemble& e);
Matrix sample_covariance(const Matrix& x);

// throws InvalidCovariance unless symmetric positive definite
void require_spd(const Matrix& m, const char* what);

}  // namespace arwp
