#pragma once

#include "arwp/core.hpp"

#include <functional>
#include <vector>

namespace arwp {

struct GridSpec {
    Vector lo;
    Vector hi;
    double mesh = 0.01;

    Eigen::Index dim() const { return lo.size(); }
    Eigen::Index nodes(Eigen::Index k) const;  // node count along axis k
    Eigen::Index total_nodes() const;
    double node(Eigen::Index k, Eigen::Index i) const { return lo(k) + static_cast<double>(i) * mesh; }
    double cell_volume() const;
    void validate() const;
    bool compatible(const GridSpec& other) const;
};

// Values laid out with the last axis fastest.
struct DensityGrid {
    GridSpec grid;
    std::vector<double> values;

    double mass() const;
};

// Target log-density tabulated on a grid, optionally shifted so its mass on the box is 1.
struct TargetGrid {
    GridSpec grid;
    std::vector<double> log_values;
    double log_mass = 0.0;  // log of the box mass before any renormalization
    bool renormalized = false;
};

using LogDensityFn = std::function<double(const Vector&)>;

TargetGrid tabulate_target(const LogDensityFn& log_density, const GridSpec& grid, bool renormalize);

DensityGrid kde_density(const Matrix& samples, double bandwidth, const GridSpec& grid);

double grid_kl(const DensityGrid& estimated, const TargetGrid& target);
// the target must already integrate to 1 over the box within 5 %
double grid_kl(const DensityGrid& estimated, const LogDensityFn& target_log_density, const GridSpec& grid);

double trace_error(const Matrix& sigma, const Matrix& sigma_star);

// deterministic pairwise summation
double pairwise_sum(const double* x, std::size_t n);

}  // namespace arwp
