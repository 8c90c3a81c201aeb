#pragma once

#include "arwp/core.hpp"

#include <array>
#include <complex>
#include <vector>

namespace arwp {

// Multi-dimensional flows assume Sigma, Lambda, G commute; they are handled as
// diagonals (one scalar problem per eigendirection).

struct NonCommutingInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RegularizationTooLarge : DomainError {
    using DomainError::DomainError;
};

struct SpdViolation : DomainError {
    SpdViolation(double t, const std::string& what);
    double time;
};

struct SingularUpdate : DomainError {
    using DomainError::DomainError;
};

// diagonal of a matrix that must be diagonal (throws NonCommutingInput otherwise)
Vector diagonal_spectrum(const Matrix& m);

struct RwpoGaussianMap {
    Vector k_plus;
    Vector k_minus;
    Vector sigma_stationary;  // K+ Lambda K-
};

RwpoGaussianMap rwpo_gaussian_map(const Vector& lambda, double T);

// Covariance of WProx(N(0, sigma)) for V = x' lambda^{-1} x / 2. Requires T < lambda_min.
Matrix rwpo_gaussian_cov(const Matrix& sigma, const Matrix& lambda, double T, double beta = 1.0);
double rwpo_gaussian_cov(double sigma, double lambda, double T, double beta = 1.0);
Matrix rwpo_gaussian_cov_inverse(const Matrix& sigma_tilde, const Matrix& lambda, double T, double beta = 1.0);
double rwpo_gaussian_cov_inverse(double sigma_tilde, double lambda, double T, double beta = 1.0);

struct CovarianceState {
    Vector sigma;  // Sigma per eigendirection
    Vector g;      // momentum map G per eigendirection
    double t = 0.0;

    static CovarianceState scalar(double sigma, double g = 0.0, double t = 0.0);
};

std::vector<CovarianceState> continuous_cov_flow(const CovarianceState& init, const Vector& lambda, double T, double a,
                                                 double t_end, double dt, double beta = 1.0, int record_every = 1);

// One step of the symplectic recursion. state.g holds G_{k-1}; returns (Sigma_{k+1}, G_k).
CovarianceState discrete_cov_step(const CovarianceState& state, const Vector& lambda, double T,
                                  const DampingSchedule& damping, double eta, std::uint64_t k, double beta = 1.0);

// K + 1 states; state k has t = k
std::vector<CovarianceState> discrete_cov_flow(const CovarianceState& init, const Vector& lambda, double T,
                                               const DampingSchedule& damping, double eta, std::uint64_t K,
                                               double beta = 1.0);

double linearized_rate_cts(double lambda_min, double lambda_max, double T, double a);

enum class OptimalMode { MaxCritical, MinCritical };

struct OptimalParams {
    double a;
    double eta;
    double rate;
};

// relaxed = false enforces T <= lambda_min / (1 + sqrt 2); relaxed evaluates the same
// endpoint formulas for any T < lambda_min
OptimalParams optimal_params(double lambda_min, double lambda_max, double T, OptimalMode mode, bool relaxed = false);

struct LinearizedSystem {
    Eigen::Matrix2d a_matrix;
    std::complex<double> chi_plus, chi_minus;
    std::complex<double> update_plus, update_minus;  // 1 + eta chi
    double spectral_radius;                          // of I + eta A
};

LinearizedSystem linearized_update_matrix(double lambda, double T, double a, double eta);

struct KlmcCovSystem {
    Eigen::Matrix3d matrix;  // acts on (S11 - lambda, S12, S22 - 1)
    std::array<std::complex<double>, 3> eigs;
};

KlmcCovSystem klmc_cov_matrix(double lambda, double a);

struct LyapunovState {
    double b_plus = 0.0, b_minus = 0.0;
    double zeta = 1.0;
    double p = 0.0;
    double e_value = 0.0, f_value = 0.0;
    double rate = 0.0;      // smallest positive root r of the rate quadratic
    double decay = 0.0;     // guaranteed d/dt log(Lyapunov) <= -decay
    double residual = 0.0;  // |quadratic(r)|
};

// a defaults to critical damping 2 lambda^{-1/2}; valid for a in (lambda^{-1/2}, 2 lambda^{-1/2}]
LyapunovState lyapunov_E(double sigma_tilde, double g, double lambda, double T);
LyapunovState lyapunov_E(double sigma_tilde, double g, double lambda, double T, double a);
LyapunovState lyapunov_F(double sigma_tilde, double g, double lambda, double T, double a);

// critical-damping bound lambda^{-1/2} (1 - 2T k+^{-1} sigma_tilde^{-1})
double critical_decay_bound(double sigma_tilde, double lambda, double T);

double kl_gaussian(double s1, double s2);
double kl_gaussian(const Matrix& s1, const Matrix& s2);
double kl_upper_bound(double sigma_tilde, double lambda);

}  // namespace arwp
