#include "arwp/gaussian_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace arwp {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void require_T(double T, double lambda_min) {
    if (!(T >= 0.0)) throw DomainError("T must be nonnegative");
    if (!(T < lambda_min))
        throw RegularizationTooLarge("T = " + std::to_string(T) + " must be below lambda_min = " +
                                     std::to_string(lambda_min));
}

void require_positive(const Vector& v, const char* what) {
    if (v.size() == 0 || !v.allFinite() || (v.array() <= 0.0).any())
        throw InvalidCovariance(std::string(what) + " must have positive finite entries");
}

double kplus(double lambda, double T) { return 1.0 + T / lambda; }

// sigma_tilde as a function of sigma, per direction
double prox_var(double sigma, double lambda, double T, double beta) {
    double k = kplus(lambda, T);
    return 2.0 * T / (beta * k) + sigma / (k * k);
}

// x - log(1 + x) without cancellation near 0
double x_minus_log1p(double x) {
    if (std::abs(x) < 1e-4) {
        double x2 = x * x;
        return x2 / 2.0 - x2 * x / 3.0 + x2 * x2 / 4.0 - x2 * x2 * x / 5.0;
    }
    return x - std::log1p(x);
}

// smallest positive root of zeta^{-2} p^2 + 4 (-p + r B w)(1 - r) B = 0
void rate_root(LyapunovState& s, double w) {
    double B = s.b_plus;
    double alpha = -4.0 * B * B * w;
    double beta = 4.0 * B * (s.p + B * w);
    double gamma = s.p * s.p / (s.zeta * s.zeta) - 4.0 * B * s.p;
    double disc = beta * beta - 4.0 * alpha * gamma;
    double r;
    if (disc <= 0.0) {
        r = -beta / (2.0 * alpha);  // roundoff: treat as a double root
    } else {
        r = 2.0 * gamma / (-beta - std::sqrt(disc));
    }
    s.rate = r;
    s.residual = std::abs((alpha * r + beta) * r + gamma);
    s.decay = 2.0 * r * B * w / s.zeta;
}

struct LyapunovParts {
    double weight;  // sigma_tilde - 2T/k+
    double kl2;     // 2 KL(sigma_tilde, lambda)
    double w;       // weight / ((2 sqrt(lambda) b+ - 1) sigma_tilde)
};

LyapunovParts lyapunov_parts(LyapunovState& s, double st, double lambda, double T) {
    if (!(st > 0.0) || !(lambda > 0.0)) throw DomainError("sigma_tilde and lambda must be positive");
    if (!(T >= 0.0 && T < lambda)) throw RegularizationTooLarge("need 0 <= T < lambda");
    double k = kplus(lambda, T);
    LyapunovParts parts;
    parts.weight = st - 2.0 * T / k;
    if (!(parts.weight > 0.0))
        throw DomainError("sigma_tilde - 2T/k+ must be positive (state outside the analysis domain)");
    double il = 1.0 / std::sqrt(lambda), is = 1.0 / std::sqrt(st);
    s.b_plus = il + is;
    s.b_minus = il - is;
    parts.kl2 = 2.0 * kl_gaussian(st, lambda);
    parts.w = parts.weight / ((2.0 * std::sqrt(lambda) * s.b_plus - 1.0) * st);
    return parts;
}

}  // namespace

SpdViolation::SpdViolation(double t, const std::string& what)
    : DomainError(what + " at t = " + std::to_string(t)), time(t) {}

Vector diagonal_spectrum(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InvalidCovariance("matrix must be square");
    double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    Matrix off = m;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw NonCommutingInput("theory flows need diagonal (simultaneously diagonalizable) covariances");
    return m.diagonal();
}

RwpoGaussianMap rwpo_gaussian_map(const Vector& lambda, double T) {
    require_positive(lambda, "lambda");
    require_T(T, lambda.minCoeff());
    RwpoGaussianMap m;
    m.k_plus = (1.0 + T / lambda.array()).matrix();
    m.k_minus = (1.0 - T / lambda.array()).matrix();
    m.sigma_stationary = (m.k_plus.array() * lambda.array() * m.k_minus.array()).matrix();
    return m;
}

Matrix rwpo_gaussian_cov(const Matrix& sigma, const Matrix& lambda, double T, double beta) {
    require_spd(lambda, "lambda");
    if (sigma.rows() != lambda.rows() || sigma.cols() != lambda.cols())
        throw InvalidCovariance("sigma and lambda dimensions differ");
    Eigen::SelfAdjointEigenSolver<Matrix> es(lambda);
    require_T(T, es.eigenvalues().minCoeff());
    Vector kinv = (1.0 / (1.0 + T / es.eigenvalues().array())).matrix();
    const Matrix& U = es.eigenvectors();
    Matrix Kinv = U * kinv.asDiagonal() * U.transpose();
    if (lambda.isDiagonal(0.0)) Kinv = (1.0 / (1.0 + T / lambda.diagonal().array())).matrix().asDiagonal();
    Matrix out = (2.0 * T / beta) * Kinv + Kinv * sigma * Kinv;
    return 0.5 * (out + out.transpose());
}

double rwpo_gaussian_cov(double sigma, double lambda, double T, double beta) {
    if (!(lambda > 0.0)) throw InvalidCovariance("lambda must be positive");
    require_T(T, lambda);
    return prox_var(sigma, lambda, T, beta);
}

Matrix rwpo_gaussian_cov_inverse(const Matrix& sigma_tilde, const Matrix& lambda, double T, double beta) {
    require_spd(lambda, "lambda");
    if (sigma_tilde.rows() != lambda.rows() || sigma_tilde.cols() != lambda.cols())
        throw InvalidCovariance("sigma_tilde and lambda dimensions differ");
    Eigen::SelfAdjointEigenSolver<Matrix> es(lambda);
    require_T(T, es.eigenvalues().minCoeff());
    const Matrix& U = es.eigenvectors();
    Matrix K = U * (1.0 + T / es.eigenvalues().array()).matrix().asDiagonal() * U.transpose();
    if (lambda.isDiagonal(0.0)) K = (1.0 + T / lambda.diagonal().array()).matrix().asDiagonal();
    Matrix out = K * sigma_tilde * K - (2.0 * T / beta) * K;
    out = 0.5 * (out + out.transpose());
    if (Eigen::LLT<Matrix>(out).info() != Eigen::Success)
        throw DomainError("sigma_tilde is not the image of a covariance (below 2T/beta K+^{-1})");
    return out;
}

double rwpo_gaussian_cov_inverse(double sigma_tilde, double lambda, double T, double beta) {
    if (!(lambda > 0.0)) throw InvalidCovariance("lambda must be positive");
    require_T(T, lambda);
    double k = kplus(lambda, T);
    double s = k * k * sigma_tilde - 2.0 * T * k / beta;
    if (!(s > 0.0)) throw DomainError("sigma_tilde is not the image of a covariance (below 2T/(beta k+))");
    return s;
}

CovarianceState CovarianceState::scalar(double sigma, double g, double t) {
    CovarianceState s;
    s.sigma = Vector::Constant(1, sigma);
    s.g = Vector::Constant(1, g);
    s.t = t;
    return s;
}

std::vector<CovarianceState> continuous_cov_flow(const CovarianceState& init, const Vector& lambda, double T, double a,
                                                 double t_end, double dt, double beta, int record_every) {
    require_positive(lambda, "lambda");
    require_T(T, lambda.minCoeff());
    if (init.sigma.size() != lambda.size() || init.g.size() != lambda.size())
        throw InvalidCovariance("state and lambda dimensions differ");
    require_positive(init.sigma, "initial sigma");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
    if (record_every < 1) throw ConfigError("record_every must be >= 1");

    const Eigen::Index d = lambda.size();
    auto rhs = [&](const Vector& s, const Vector& g, Vector& ds, Vector& dg) {
        for (Eigen::Index i = 0; i < d; ++i) {
            double st = prox_var(s(i), lambda(i), T, beta);
            ds(i) = 2.0 * g(i) * s(i);
            dg(i) = -a * g(i) - g(i) * g(i) - 1.0 / lambda(i) + 1.0 / st;
        }
    };

    auto steps = static_cast<std::uint64_t>(std::llround(t_end / dt));
    std::vector<CovarianceState> out;
    out.reserve(steps / static_cast<std::uint64_t>(record_every) + 2);
    CovarianceState cur = init;
    out.push_back(cur);
    Vector k1s(d), k1g(d), k2s(d), k2g(d), k3s(d), k3g(d), k4s(d), k4g(d);
    for (std::uint64_t n = 1; n <= steps; ++n) {
        const Vector& s = cur.sigma;
        const Vector& g = cur.g;
        rhs(s, g, k1s, k1g);
        rhs(s + 0.5 * dt * k1s, g + 0.5 * dt * k1g, k2s, k2g);
        rhs(s + 0.5 * dt * k2s, g + 0.5 * dt * k2g, k3s, k3g);
        rhs(s + dt * k3s, g + dt * k3g, k4s, k4g);
        cur.sigma = s + (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        cur.g = g + (dt / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        cur.t = static_cast<double>(n) * dt;
        if (!cur.sigma.allFinite() || !cur.g.allFinite() || (cur.sigma.array() <= 0.0).any())
            throw SpdViolation(cur.t, "covariance left the SPD cone");
        if (n % static_cast<std::uint64_t>(record_every) == 0 || n == steps) out.push_back(cur);
    }
    return out;
}

CovarianceState discrete_cov_step(const CovarianceState& state, const Vector& lambda, double T,
                                  const DampingSchedule& damping, double eta, std::uint64_t k, double beta) {
    const Eigen::Index d = lambda.size();
    double m = damping.factor(eta, k + 1);
    CovarianceState next;
    next.sigma.resize(d);
    next.g.resize(d);
    next.t = state.t + 1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        double gp = state.g(i);
        double denom = 1.0 + eta * gp;
        if (std::abs(denom) <= 1e-14 * std::max(1.0, std::abs(eta * gp)))
            throw SingularUpdate("1 + eta G is singular at iteration " + std::to_string(k));
        double st = prox_var(state.sigma(i), lambda(i), T, beta);
        double g = m * gp / denom - eta * (1.0 / lambda(i) - 1.0 / st);
        double f = 1.0 + eta * g;
        next.g(i) = g;
        next.sigma(i) = f * f * state.sigma(i);
    }
    return next;
}

std::vector<CovarianceState> discrete_cov_flow(const CovarianceState& init, const Vector& lambda, double T,
                                               const DampingSchedule& damping, double eta, std::uint64_t K,
                                               double beta) {
    require_positive(lambda, "lambda");
    require_T(T, lambda.minCoeff());
    if (init.sigma.size() != lambda.size() || init.g.size() != lambda.size())
        throw InvalidCovariance("state and lambda dimensions differ");
    require_positive(init.sigma, "initial sigma");
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    std::vector<CovarianceState> out;
    out.reserve(K + 1);
    CovarianceState cur = init;
    cur.t = 0.0;
    out.push_back(cur);
    for (std::uint64_t k = 0; k < K; ++k) {
        cur = discrete_cov_step(cur, lambda, T, damping, eta, k, beta);
        out.push_back(cur);
    }
    return out;
}

double linearized_rate_cts(double lambda_min, double lambda_max, double T, double a) {
    if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min)) throw DomainError("need 0 < lambda_min <= lambda_max");
    require_T(T, lambda_min);
    if (!(a > 0.0)) throw DomainError("damping a must be positive");
    auto disc = [&](double l) { return a * a - 8.0 / l * (1.0 - T / l) / (1.0 + T / l); };
    double worst = std::max(disc(lambda_min), disc(lambda_max));
    double crit = (1.0 + kSqrt2) * T;
    if (crit > lambda_min && crit < lambda_max) worst = std::max(worst, disc(crit));
    // critical damping computed from rounded inputs should stay critical
    if (std::abs(worst) <= 64.0 * std::numeric_limits<double>::epsilon() * a * a) worst = 0.0;
    return 0.5 * (a - std::sqrt(std::max(worst, 0.0)));
}

OptimalParams optimal_params(double lambda_min, double lambda_max, double T, OptimalMode mode, bool relaxed) {
    if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min)) throw DomainError("need 0 < lambda_min <= lambda_max");
    if (!(T >= 0.0)) throw DomainError("T must be nonnegative");
    auto f = [&](double l) { return (l - T) / (l * (l + T)); };
    if (relaxed) {
        require_T(T, lambda_min);
    } else if (T > lambda_min / (1.0 + kSqrt2) * (1.0 + 1e-12)) {
        throw RegularizationTooLarge("optimal parameters need T <= lambda_min / (1 + sqrt 2); use relaxed mode");
    }
    // relaxed mode keeps the endpoint formulas even though f may peak inside the interval
    double fmax = f(lambda_min), fmin = f(lambda_max);
    OptimalParams out;
    if (mode == OptimalMode::MaxCritical) {
        out.a = 2.0 * kSqrt2 * std::sqrt(fmin);
        out.eta = std::sqrt(fmin) / (kSqrt2 * fmax);
    } else {
        out.a = 2.0 * kSqrt2 * std::sqrt(fmax);
        out.eta = 2.0 / out.a;
    }
    out.rate = std::sqrt(std::max(1.0 - fmin / fmax, 0.0));
    return out;
}

LinearizedSystem linearized_update_matrix(double lambda, double T, double a, double eta) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    require_T(T, lambda);
    double k = kplus(lambda, T);
    double c = 2.0 * lambda - 4.0 * T / k;
    double det = c / (lambda * lambda);
    LinearizedSystem s;
    s.a_matrix << 0.0, c, -1.0 / (lambda * lambda), -a;
    double disc = a * a - 4.0 * det;
    // a double root computed from rounded inputs should stay a double root
    if (std::abs(disc) <= 64.0 * std::numeric_limits<double>::epsilon() * (a * a + 4.0 * std::abs(det))) disc = 0.0;
    std::complex<double> root = std::sqrt(std::complex<double>(disc, 0.0));
    s.chi_plus = 0.5 * (-a + root);
    s.chi_minus = 0.5 * (-a - root);
    s.update_plus = 1.0 + eta * s.chi_plus;
    s.update_minus = 1.0 + eta * s.chi_minus;
    s.spectral_radius = std::max(std::abs(s.update_plus), std::abs(s.update_minus));
    return s;
}

KlmcCovSystem klmc_cov_matrix(double lambda, double a) {
    if (!(lambda > 0.0) || !(a > 0.0)) throw DomainError("need lambda > 0 and a > 0");
    KlmcCovSystem s;
    double il = 1.0 / lambda;
    // d/dt S22 = -2 S12 / lambda - 2a (S22 - 1)
    s.matrix << 0.0, 2.0, 0.0, -il, -a, 1.0, 0.0, -2.0 * il, -2.0 * a;
    std::complex<double> root = std::sqrt(std::complex<double>(a * a - 4.0 * il, 0.0));
    s.eigs = {std::complex<double>(-a, 0.0), -a + root, -a - root};
    return s;
}

double critical_decay_bound(double sigma_tilde, double lambda, double T) {
    return (1.0 - 2.0 * T / (kplus(lambda, T) * sigma_tilde)) / std::sqrt(lambda);
}

LyapunovState lyapunov_E(double sigma_tilde, double g, double lambda, double T) {
    return lyapunov_E(sigma_tilde, g, lambda, T, 2.0 / std::sqrt(lambda));
}

LyapunovState lyapunov_E(double sigma_tilde, double g, double lambda, double T, double a) {
    LyapunovState s;
    LyapunovParts parts = lyapunov_parts(s, sigma_tilde, lambda, T);
    double il = 1.0 / std::sqrt(lambda);
    if (!(a > il) || a > 2.0 * il * (1.0 + 1e-12))
        throw DomainError("lyapunov_E needs a in (lambda^{-1/2}, 2 lambda^{-1/2}]");
    double bracket = s.b_minus + g;
    s.e_value = parts.weight * bracket * bracket + parts.kl2;
    s.f_value = s.e_value;
    s.zeta = 1.0;
    s.p = a - il + 2.0 * T / kplus(lambda, T) * std::pow(sigma_tilde, -1.5);
    rate_root(s, parts.w);
    return s;
}

LyapunovState lyapunov_F(double sigma_tilde, double g, double lambda, double T, double a) {
    LyapunovState s;
    LyapunovParts parts = lyapunov_parts(s, sigma_tilde, lambda, T);
    double il = 1.0 / std::sqrt(lambda);
    if (a < 2.0 * il * (1.0 - 1e-12))
        throw DomainError("lyapunov_F needs the overdamped hypothesis a >= 2 lambda^{-1/2}");
    s.zeta = a * std::sqrt(lambda) / 2.0;
    double bracket = s.b_minus + s.zeta * g;
    s.f_value = parts.weight * bracket * bracket / s.zeta + s.zeta * parts.kl2;
    double be = s.b_minus + g;
    s.e_value = parts.weight * be * be + parts.kl2;
    s.p = a * s.zeta - il + 2.0 * T / kplus(lambda, T) * std::pow(sigma_tilde, -1.5);
    rate_root(s, parts.w);
    return s;
}

double kl_gaussian(double s1, double s2) {
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw DomainError("variances must be positive");
    return 0.5 * x_minus_log1p(s1 / s2 - 1.0);
}

double kl_gaussian(const Matrix& s1, const Matrix& s2) {
    require_spd(s1, "sigma1");
    require_spd(s2, "sigma2");
    if (s1.rows() != s2.rows()) throw InvalidCovariance("dimensions differ");
    Eigen::LLT<Matrix> l1(s1), l2(s2);
    double logdet1 = 2.0 * l1.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double logdet2 = 2.0 * l2.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double tr = l2.solve(s1).trace();
    return 0.5 * (logdet2 - logdet1 - static_cast<double>(s1.rows()) + tr);
}

double kl_upper_bound(double sigma_tilde, double lambda) {
    if (!(sigma_tilde > 0.0) || !(lambda > 0.0)) throw DomainError("variances must be positive");
    double bm = 1.0 / std::sqrt(lambda) - 1.0 / std::sqrt(sigma_tilde);
    double bp = 1.0 / std::sqrt(lambda) + 1.0 / std::sqrt(sigma_tilde);
    return sigma_tilde * std::sqrt(lambda) * bm * bm * bp - 0.5 * sigma_tilde * bm * bm;
}

}  // namespace arwp
