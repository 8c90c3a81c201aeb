#pragma once

#include "arwp/core.hpp"

#include <concepts>
#include <string>
#include <variant>
#include <vector>

namespace arwp {

class QuadraticPotential {
public:
    // lambda is the covariance of the target N(0, lambda)
    explicit QuadraticPotential(const Matrix& lambda);

    const Matrix& lambda() const { return lambda_; }
    const Matrix& lambda_inv() const { return lambda_inv_; }
    double lambda_min() const { return eig_min_; }
    double lambda_max() const { return eig_max_; }
    double condition_number() const { return eig_max_ / eig_min_; }
    Eigen::Index dim() const { return lambda_.rows(); }

    double value(const Vector& x) const { return 0.5 * x.dot(lambda_inv_ * x); }
    Vector gradient(const Vector& x) const { return lambda_inv_ * x; }

private:
    Matrix lambda_;
    Matrix lambda_inv_;
    double eig_min_ = 0.0;
    double eig_max_ = 0.0;
};

// V(x, y) = scale * ((1 - x)^2 + 100 (y - x^2)^2)
class RosenbrockPotential {
public:
    double scale = 1.0 / 20.0;

    Eigen::Index dim() const { return 2; }
    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
};

// V(x) = -log sum_i w_i exp(-|x - c_i|^2 / (2 s_i)), s_i = bandwidth (variance)
class GaussianMixturePotential {
public:
    GaussianMixturePotential(std::vector<Vector> centers, std::vector<double> weights, std::vector<double> bandwidths);

    static GaussianMixturePotential four_well();

    const std::vector<Vector>& centers() const { return centers_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& bandwidths() const { return bandwidths_; }
    Eigen::Index dim() const { return centers_.front().size(); }

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;

private:
    std::vector<Vector> centers_;
    std::vector<double> weights_;
    std::vector<double> bandwidths_;
    std::vector<double> log_w_;
};

struct ZeroPotential {
    Eigen::Index d = 1;
    Eigen::Index dim() const { return d; }
    double value(const Vector&) const { return 0.0; }
    Vector gradient(const Vector& x) const { return Vector::Zero(x.size()); }
};

class Potential {
public:
    using Model = std::variant<QuadraticPotential, RosenbrockPotential, GaussianMixturePotential, ZeroPotential>;

    template <class P>
        requires(!std::same_as<std::decay_t<P>, Potential> && std::constructible_from<Model, P>)
    Potential(P&& p) : model_(std::forward<P>(p)) {}

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    // gradient of every column of a d x N matrix
    Matrix gradient_all(const Matrix& x) const;
    Eigen::Index dim() const;
    std::string name() const;

    const Model& model() const { return model_; }
    const QuadraticPotential* quadratic() const { return std::get_if<QuadraticPotential>(&model_); }

private:
    Model model_;
};

double eval_potential(const Potential& p, const Vector& x);
Vector grad_potential(const Potential& p, const Vector& x);

}  // namespace arwp
