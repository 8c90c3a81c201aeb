#include "arwp/potentials.hpp"
#include "arwp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arwp {

QuadraticPotential::QuadraticPotential(const Matrix& lambda) : lambda_(lambda) {
    require_spd(lambda_, "quadratic potential covariance");
    Eigen::SelfAdjointEigenSolver<Matrix> es(lambda_);
    eig_min_ = es.eigenvalues().minCoeff();
    eig_max_ = es.eigenvalues().maxCoeff();
    // symmetric inverse; exact reciprocals when diagonal
    lambda_inv_ = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    if (lambda_.isDiagonal(0.0)) lambda_inv_ = lambda_.diagonal().cwiseInverse().asDiagonal();
}

double RosenbrockPotential::value(const Vector& v) const {
    double x = v(0), y = v(1);
    double r = y - x * x;
    return scale * ((1.0 - x) * (1.0 - x) + 100.0 * r * r);
}

Vector RosenbrockPotential::gradient(const Vector& v) const {
    double x = v(0), y = v(1);
    double r = y - x * x;
    Vector g(2);
    g(0) = scale * (-2.0 * (1.0 - x) - 400.0 * x * r);
    g(1) = scale * 200.0 * r;
    return g;
}

GaussianMixturePotential::GaussianMixturePotential(std::vector<Vector> centers, std::vector<double> weights,
                                                   std::vector<double> bandwidths)
    : centers_(std::move(centers)), weights_(std::move(weights)), bandwidths_(std::move(bandwidths)) {
    if (centers_.empty()) throw ConfigError("mixture needs at least one component");
    if (centers_.size() != weights_.size() || centers_.size() != bandwidths_.size())
        throw ConfigError("mixture centers, weights and bandwidths differ in length");
    for (const auto& c : centers_)
        if (c.size() != centers_.front().size()) throw ConfigError("mixture centers differ in dimension");
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] > 0.0)) throw ConfigError("mixture weights must be positive");
        if (!(bandwidths_[i] > 0.0)) throw ConfigError("mixture bandwidths must be positive");
        log_w_.push_back(std::log(weights_[i]));
    }
}

GaussianMixturePotential GaussianMixturePotential::four_well() {
    std::vector<Vector> c(4, Vector(2));
    c[0] << 0.0, 0.0;
    c[1] << 3.0, 0.0;
    c[2] << -3.0, -1.0;
    c[3] << -3.0, 1.0;
    return {c, {1.0, 0.5, 0.5, 0.5}, {0.5, 0.25, 0.25, 0.25}};
}

namespace {

// log-weights of each component at x, and their log-sum-exp
double component_logits(const GaussianMixturePotential& m, const std::vector<double>& log_w, const Vector& x,
                        std::vector<double>& out) {
    const auto& c = m.centers();
    const auto& s = m.bandwidths();
    out.resize(c.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i) {
        out[i] = log_w[i] - (x - c[i]).squaredNorm() / (2.0 * s[i]);
        mx = std::max(mx, out[i]);
    }
    double acc = 0.0;
    for (double l : out) acc += std::exp(l - mx);
    return mx + std::log(acc);
}

}  // namespace

double GaussianMixturePotential::value(const Vector& x) const {
    std::vector<double> l;
    return -component_logits(*this, log_w_, x, l);
}

Vector GaussianMixturePotential::gradient(const Vector& x) const {
    std::vector<double> l;
    double lse = component_logits(*this, log_w_, x, l);
    Vector g = Vector::Zero(x.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        double r = std::exp(l[i] - lse);
        g += (r / bandwidths_[i]) * (x - centers_[i]);
    }
    return g;
}

double Potential::value(const Vector& x) const {
    return std::visit([&](const auto& p) { return p.value(x); }, model_);
}

Vector Potential::gradient(const Vector& x) const {
    return std::visit([&](const auto& p) { return p.gradient(x); }, model_);
}

Matrix Potential::gradient_all(const Matrix& x) const {
    Matrix g(x.rows(), x.cols());
    parallel_for(x.cols(), [&](Eigen::Index i) { g.col(i) = gradient(x.col(i)); });
    return g;
}

Eigen::Index Potential::dim() const {
    return std::visit([](const auto& p) { return p.dim(); }, model_);
}

std::string Potential::name() const {
    struct Namer {
        std::string operator()(const QuadraticPotential&) const { return "quadratic"; }
        std::string operator()(const RosenbrockPotential&) const { return "rosenbrock"; }
        std::string operator()(const GaussianMixturePotential&) const { return "gmm"; }
        std::string operator()(const ZeroPotential&) const { return "zero"; }
    };
    return std::visit(Namer{}, model_);
}

double eval_potential(const Potential& p, const Vector& x) { return p.value(x); }
Vector grad_potential(const Potential& p, const Vector& x) { return p.gradient(x); }

}  // namespace arwp
