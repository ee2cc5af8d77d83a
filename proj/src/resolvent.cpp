#include "extlab/resolvent.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "extlab/rng.hpp"

namespace extlab::resolvent {

using schrodinger::DomainGrid;
using schrodinger::GridPolicy;

HelmholtzDiscretization assemble_helmholtz(const geometry::SceneGeometry& scene,
                                           const HelmholtzGridPolicy& policy) {
    if (!(policy.lambda_max > 0.0)) throw ValidationError("lambda_max must be positive");
    // Reuse the schrodinger grid builder: frequency sqrt(lambda_max) at the
    // requested points per wavelength.
    GridPolicy gp;
    gp.points_per_wavelength = policy.points_per_wavelength;
    gp.absorber_frac = policy.absorber_frac;
    gp.absorber_width = policy.absorber_width;
    gp.sigma_max = policy.sigma_max;
    const double k = std::sqrt(policy.lambda_max);
    const int n_eff = std::max(1, static_cast<int>(std::ceil(k)));
    // build_grid quantizes dx by n; rebuild the exact target via ppw scaling
    gp.points_per_wavelength = policy.points_per_wavelength * k / n_eff;
    auto domain = schrodinger::build_grid(scene, n_eff, gp);

    const auto& spec = domain->spec;
    const double idx2 = 1.0 / (spec.dx * spec.dx);
    HelmholtzDiscretization disc;
    disc.domain = domain;
    disc.lambda_resolvable = policy.lambda_max;

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(spec.size() * 5);
    auto masked = [&](int i, int j) {
        return i < 0 || j < 0 || i >= spec.nx || j >= spec.ny ||
               domain->mask[spec.index(i, j)] != 0;
    };
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const auto row = static_cast<int>(spec.index(i, j));
            if (domain->mask[spec.index(i, j)]) {
                trip.emplace_back(row, row, Complex{1.0, 0.0});
                continue;
            }
            const double sigma = domain->sigma_x[i] + domain->sigma_y[j];
            trip.emplace_back(row, row, Complex{4.0 * idx2, -sigma});
            if (!masked(i - 1, j)) trip.emplace_back(row, row - 1, Complex{-idx2, 0.0});
            if (!masked(i + 1, j)) trip.emplace_back(row, row + 1, Complex{-idx2, 0.0});
            if (!masked(i, j - 1))
                trip.emplace_back(row, row - spec.nx, Complex{-idx2, 0.0});
            if (!masked(i, j + 1))
                trip.emplace_back(row, row + spec.nx, Complex{-idx2, 0.0});
        }
    disc.op.resize(static_cast<int>(spec.size()), static_cast<int>(spec.size()));
    disc.op.setFromTriplets(trip.begin(), trip.end());
    disc.op.makeCompressed();
    return disc;
}

double EpsPolicy::eps_at(double lambda) const { return c / std::log(2.0 + std::abs(lambda)); }

ResolventNormResult cutoff_resolvent_norm(const HelmholtzDiscretization& disc, double lambda,
                                          double eps, const RadialBump& chi, std::uint64_t seed,
                                          double rel_tol, int max_iter) {
    if (!(eps > 0.0)) throw ValidationError("cutoff_resolvent_norm requires eps > 0");
    const auto& spec = disc.domain->spec;
    const auto n = static_cast<Eigen::Index>(disc.size());

    SparseOp shifted = disc.op;
    const Complex shift{lambda, eps};
    for (Eigen::Index d = 0; d < n; ++d) {
        if (disc.domain->mask[d]) continue;  // keep identity rows intact
        shifted.coeffRef(d, d) -= shift;
    }
    shifted.makeCompressed();

    Eigen::SparseLU<SparseOp> lu;
    lu.compute(shifted);
    ResolventNormResult res;
    if (lu.info() != Eigen::Success) {
        res.solve_ok = false;
        return res;
    }

    Eigen::VectorXcd chi_vec(n);
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i)
            chi_vec[static_cast<Eigen::Index>(spec.index(i, j))] =
                disc.domain->mask[spec.index(i, j)] ? 0.0 : chi(spec.node(i, j));

    // B = chi R chi; A^T = A so the adjoint solve is conj(solve(conj(.))).
    auto apply_b = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        Eigen::VectorXcd w = chi_vec.cwiseProduct(v);
        w = lu.solve(w);
        return chi_vec.cwiseProduct(w);
    };
    auto apply_bh = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        Eigen::VectorXcd w = chi_vec.cwiseProduct(v).conjugate();
        w = lu.solve(w);
        return chi_vec.cwiseProduct(w.conjugate());
    };

    Rng rng(seed);
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex{rng.normal(), rng.normal()};
    v.normalize();

    double sigma_prev = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXcd bv = apply_b(v);
        const double sigma = bv.norm();
        res.iterations = it;
        if (sigma <= 0.0) {
            res.norm = 0.0;
            res.converged = true;
            return res;
        }
        if (it >= 3 && std::abs(sigma - sigma_prev) <= rel_tol * sigma) {
            res.norm = sigma;
            res.converged = true;
            return res;
        }
        sigma_prev = sigma;
        v = apply_bh(bv);
        v.normalize();
    }
    res.norm = sigma_prev;
    res.converged = false;
    return res;
}

ResolventReport resolvent_scan(const HelmholtzDiscretization& disc,
                               const std::vector<double>& lambda_grid, const EpsPolicy& policy,
                               const RadialBump& chi, std::uint64_t seed) {
    ResolventReport rep;
    rep.grid_nx = disc.domain->spec.nx;
    rep.grid_ny = disc.domain->spec.ny;
    rep.dx = disc.domain->spec.dx;
    for (double lam : lambda_grid) {
        if (lam > disc.lambda_resolvable * (1.0 + 1e-12))
            throw ValidationError("lambda grid exceeds the resolution budget of the operator");
        ResolventRow row;
        row.lambda = lam;
        row.eps = policy.eps_at(lam);
        const auto r = cutoff_resolvent_norm(disc, lam, row.eps, chi, seed);
        row.norm = r.norm;
        row.iterations = r.iterations;
        row.solve_ok = r.solve_ok;
        if (lam > 0.0 && r.solve_ok) {
            row.bound_stat = r.norm * (1.0 + std::sqrt(lam)) / std::log(2.0 + lam);
            row.bound_stat_nolog = r.norm * (1.0 + std::sqrt(lam));
        }
        rep.rows.push_back(row);
    }

    // Outliers: norm above 10x the median of the 7-row neighborhood
    // (truncated-domain resonances spike individual rows).
    const int W = 3;
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        if (!rep.rows[i].solve_ok || rep.rows[i].lambda <= 0.0) continue;
        std::vector<double> nbrs;
        for (size_t j = i >= W ? i - W : 0; j < rep.rows.size() && j <= i + W; ++j)
            if (rep.rows[j].solve_ok && rep.rows[j].lambda > 0.0)
                nbrs.push_back(rep.rows[j].norm);
        if (nbrs.size() < 3) continue;
        std::sort(nbrs.begin(), nbrs.end());
        const double median = nbrs[nbrs.size() / 2];
        if (rep.rows[i].norm > 10.0 * median) rep.rows[i].outlier = true;
    }

    double lam_min_pos = 0.0;
    for (const auto& row : rep.rows) {
        if (row.lambda <= 0.0 || !row.solve_ok || row.outlier) continue;
        if (lam_min_pos == 0.0) lam_min_pos = row.lambda;
        if (row.bound_stat > rep.cstar) {
            rep.cstar = row.bound_stat;
            rep.max_stat_lambda = row.lambda;
        }
    }
    rep.max_in_lowest_decade =
        lam_min_pos > 0.0 && rep.max_stat_lambda <= 10.0 * lam_min_pos + 1e-12;

    // Trend over [50, lambda_max]: least-squares slope of the bound statistic.
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rep.rows)
        if (row.lambda >= 50.0 && row.solve_ok && !row.outlier)
            pts.push_back({row.lambda, row.bound_stat});
    if (pts.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto& [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double m = pts.size();
        const double denom = m * sxx - sx * sx;
        rep.high_range_slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
        rep.high_range_mean = sy / m;
        const double range = pts.back().first - pts.front().first;
        rep.trend_ok =
            rep.high_range_slope * range <= 0.2 * rep.high_range_mean + 1e-300;
    }
    return rep;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2)
        throw ValidationError("log_spaced needs 0 < lo < hi and count >= 2");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    return out;
}

}  // namespace extlab::resolvent
