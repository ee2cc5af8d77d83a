#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "extlab/bump.hpp"
#include "extlab/grid.hpp"

namespace extlab::resolvent {

using Complex = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<Complex>;

struct HelmholtzGridPolicy {
    double lambda_max = 400.0;           // largest spectral parameter to resolve
    double points_per_wavelength = 8.0;  // at sqrt(lambda_max)
    double absorber_frac = 0.15;
    double absorber_width = 0.0;   // absolute override when > 0
    double sigma_max = 0.0;        // 0 disables the absorber
};

// Discrete exterior Helmholtz operator -Lap_h - i sigma with hard Dirichlet
// rows on the obstacle mask.
struct HelmholtzDiscretization {
    std::shared_ptr<const schrodinger::DomainGrid> domain;
    SparseOp op;
    double lambda_resolvable = 0.0;

    size_t size() const { return domain->spec.size(); }
};

HelmholtzDiscretization assemble_helmholtz(const geometry::SceneGeometry& scene,
                                           const HelmholtzGridPolicy& policy);

struct ResolventNormResult {
    double norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool solve_ok = true;
};

// Largest singular value of chi (A - lambda - i eps)^{-1} chi estimated by
// power iteration on the composition with its adjoint; each application is a
// sparse direct solve.  Deterministic for a fixed seed.
ResolventNormResult cutoff_resolvent_norm(const HelmholtzDiscretization& disc, double lambda,
                                          double eps, const RadialBump& chi,
                                          std::uint64_t seed = 1, double rel_tol = 1e-3,
                                          int max_iter = 500);

struct EpsPolicy {
    double c = 1.0;  // eps(lambda) = c / log(2 + |lambda|)
    double eps_at(double lambda) const;
};

struct ResolventRow {
    double lambda = 0.0;
    double eps = 0.0;
    double norm = 0.0;
    int iterations = 0;
    bool solve_ok = true;
    bool outlier = false;
    double bound_stat = 0.0;        // norm (1 + sqrt(lambda)) / log(2 + lambda)
    double bound_stat_nolog = 0.0;  // norm (1 + sqrt(lambda))
};

struct ResolventReport {
    std::vector<ResolventRow> rows;
    double cstar = 0.0;           // max bound_stat over valid non-outlier rows
    double max_stat_lambda = 0.0; // location of that maximum
    bool max_in_lowest_decade = false;
    double high_range_slope = 0.0;   // LS slope of bound_stat on [50, lambda_max]
    double high_range_mean = 0.0;
    bool trend_ok = false;  // slope * range <= 20% of the mean over [50, ...]
    int grid_nx = 0, grid_ny = 0;
    double dx = 0.0;
};

ResolventReport resolvent_scan(const HelmholtzDiscretization& disc,
                               const std::vector<double>& lambda_grid, const EpsPolicy& policy,
                               const RadialBump& chi, std::uint64_t seed = 1);

// Log-spaced grid helper for scan configs.
std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace extlab::resolvent
