#include "arwp/metrics.hpp"
#include "arwp/parallel.hpp"

#include <cmath>
#include <numbers>

namespace arwp {

namespace {
constexpr double kFloor = 1e-300;
}

Eigen::Index GridSpec::nodes(Eigen::Index k) const {
    return static_cast<Eigen::Index>(std::llround((hi(k) - lo(k)) / mesh)) + 1;
}

Eigen::Index GridSpec::total_nodes() const {
    Eigen::Index n = 1;
    for (Eigen::Index k = 0; k < dim(); ++k) n *= nodes(k);
    return n;
}

double GridSpec::cell_volume() const { return std::pow(mesh, static_cast<double>(dim())); }

void GridSpec::validate() const {
    if (lo.size() == 0 || lo.size() != hi.size()) throw ConfigError("grid corners must have equal, nonzero dimension");
    if (!(mesh > 0.0)) throw ConfigError("grid mesh must be positive");
    for (Eigen::Index k = 0; k < dim(); ++k) {
        if (!(hi(k) > lo(k))) throw ConfigError("grid needs hi > lo");
        double cells = (hi(k) - lo(k)) / mesh;
        if (std::abs(cells - std::round(cells)) > 1e-6 * std::max(1.0, cells))
            throw ConfigError("grid extent is not a whole number of mesh cells");
    }
}

bool GridSpec::compatible(const GridSpec& o) const {
    if (dim() != o.dim() || mesh != o.mesh) return false;
    for (Eigen::Index k = 0; k < dim(); ++k)
        if (lo(k) != o.lo(k) || nodes(k) != o.nodes(k)) return false;
    return true;
}

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 64) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double DensityGrid::mass() const { return pairwise_sum(values.data(), values.size()) * grid.cell_volume(); }

namespace {

Vector node_point(const GridSpec& g, Eigen::Index flat) {
    Vector x(g.dim());
    for (Eigen::Index k = g.dim() - 1; k >= 0; --k) {
        Eigen::Index n = g.nodes(k);
        x(k) = g.node(k, flat % n);
        flat /= n;
    }
    return x;
}

}  // namespace

TargetGrid tabulate_target(const LogDensityFn& log_density, const GridSpec& grid, bool renormalize) {
    grid.validate();
    TargetGrid t;
    t.grid = grid;
    Eigen::Index n = grid.total_nodes();
    t.log_values.resize(static_cast<std::size_t>(n));
    parallel_for(n, [&](Eigen::Index i) { t.log_values[static_cast<std::size_t>(i)] = log_density(node_point(grid, i)); });
    double mx = -INFINITY;
    for (double v : t.log_values) mx = std::max(mx, v);
    if (!std::isfinite(mx)) throw DomainError("target density vanishes on the whole grid");
    std::vector<double> e(t.log_values.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(t.log_values[i] - mx);
    t.log_mass = mx + std::log(pairwise_sum(e.data(), e.size()) * grid.cell_volume());
    if (renormalize) {
        for (double& v : t.log_values) v -= t.log_mass;
        t.renormalized = true;
    }
    return t;
}

DensityGrid kde_density(const Matrix& samples, double bandwidth, const GridSpec& grid) {
    grid.validate();
    if (!(bandwidth > 0.0)) throw ConfigError("KDE bandwidth must be positive");
    if (samples.cols() < 1) throw ConfigError("KDE needs at least one sample");
    if (samples.rows() != grid.dim()) throw ConfigError("sample and grid dimensions differ");
    const Eigen::Index d = grid.dim(), n = samples.cols();
    // the kernel factorizes over axes: one N x nodes(k) table per axis
    double norm1 = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bandwidth);
    std::vector<Matrix> f(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) {
        Eigen::Index m = grid.nodes(k);
        Matrix& fk = f[static_cast<std::size_t>(k)];
        fk.resize(n, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            double x = grid.node(k, j);
            for (Eigen::Index i = 0; i < n; ++i) {
                double z = (x - samples(k, i)) / bandwidth;
                fk(i, j) = norm1 * std::exp(-0.5 * z * z);
            }
        }
    }
    DensityGrid out;
    out.grid = grid;
    out.values.assign(static_cast<std::size_t>(grid.total_nodes()), 0.0);
    double inv_n = 1.0 / static_cast<double>(n);
    if (d == 1) {
        Vector v = f[0].colwise().sum().transpose() * inv_n;
        for (Eigen::Index j = 0; j < v.size(); ++j) out.values[static_cast<std::size_t>(j)] = v(j);
    } else if (d == 2) {
        // row-major (axis 0 slow): values(i0, i1) = sum_s f0(s, i0) f1(s, i1)
        Matrix v = (f[0].transpose() * f[1]) * inv_n;
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            out.values.data(), v.rows(), v.cols()) = v;
    } else {
        parallel_for(grid.total_nodes(), [&](Eigen::Index flat) {
            std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
            Eigen::Index r = flat;
            for (Eigen::Index k = d - 1; k >= 0; --k) {
                idx[static_cast<std::size_t>(k)] = r % grid.nodes(k);
                r /= grid.nodes(k);
            }
            double acc = 0.0;
            for (Eigen::Index s = 0; s < n; ++s) {
                double prod = 1.0;
                for (Eigen::Index k = 0; k < d; ++k) prod *= f[static_cast<std::size_t>(k)](s, idx[static_cast<std::size_t>(k)]);
                acc += prod;
            }
            out.values[static_cast<std::size_t>(flat)] = acc * inv_n;
        });
    }
    return out;
}

double grid_kl(const DensityGrid& estimated, const TargetGrid& target) {
    if (!estimated.grid.compatible(target.grid)) throw ConfigError("estimated and target grids are incompatible");
    std::vector<double> terms(estimated.values.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        double r = estimated.values[i];
        terms[i] = r > kFloor ? r * (std::log(r) - target.log_values[i]) : 0.0;
    }
    return pairwise_sum(terms.data(), terms.size()) * estimated.grid.cell_volume();
}

double grid_kl(const DensityGrid& estimated, const LogDensityFn& target_log_density, const GridSpec& grid) {
    if (!estimated.grid.compatible(grid)) throw ConfigError("estimated and target grids are incompatible");
    TargetGrid t = tabulate_target(target_log_density, grid, false);
    if (std::abs(std::exp(t.log_mass) - 1.0) > 0.05)
        throw DomainError("target density is not normalized over the box (mass " + std::to_string(std::exp(t.log_mass)) +
                          ")");
    return grid_kl(estimated, t);
}

double trace_error(const Matrix& sigma, const Matrix& sigma_star) {
    if (sigma.rows() != sigma_star.rows() || sigma.cols() != sigma_star.cols())
        throw InvalidCovariance("trace_error needs matrices of equal shape");
    return std::abs((sigma - sigma_star).trace());
}

}  // namespace arwp
