#include "extlab/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace extlab::schrodinger {

CrankNicolsonStepper::CrankNicolsonStepper(std::shared_ptr<const DomainGrid> domain, double dt,
                                           StepperOptions opts)
    : domain_(std::move(domain)), dt_(dt), delta_(dt / 2.0), opts_(opts) {
    if (!(dt > 0.0)) throw ValidationError("stepper requires dt > 0");
    const GridSpec& spec = domain_->spec;
    ce_ = Complex{0.0, -delta_ / (spec.dx * spec.dx)};
    dshift_ = delta_ * opts_.gauge_shift;
    const size_t n = spec.size();
    u_prev_.assign(n, {});
    mu_.assign(n, {});
    mu_prev_.assign(n, {});
    b_.assign(n, {});
    r_.assign(n, {});
    z_.assign(n, {});
    row_acc_.assign(spec.ny, 0.0);
    precompute_factors();

    row_has_mask_.assign(spec.ny, 0);
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i)
            if (domain_->mask[spec.index(i, j)]) {
                row_has_mask_[j] = 1;
                break;
            }

    for (int j = 0; j < spec.ny; ++j) {
        if (domain_->sigma_y[j] > 0.0) {
            absorber_spans_.push_back({j, 0, spec.nx});
            continue;
        }
        int i = 0;
        while (i < spec.nx && domain_->sigma_x[i] > 0.0) ++i;
        if (i > 0) absorber_spans_.push_back({j, 0, i});
        int k = spec.nx;
        while (k > i && domain_->sigma_x[k - 1] > 0.0) --k;
        if (k < spec.nx) absorber_spans_.push_back({j, k, spec.nx});
    }
}

void CrankNicolsonStepper::reset_history() {
    have_history_ = false;
    have_mu_ = false;
}

void CrankNicolsonStepper::precompute_factors() {
    const GridSpec& spec = domain_->spec;
    const size_t n = spec.size();
    invden_x_.assign(n, {});
    cp_x_.assign(n, {});
    invden_y_.assign(n, {});
    cp_y_.assign(n, {});
    const double lap = 2.0 * delta_ / (spec.dx * spec.dx);
    const Complex off = ce_;

    for (int j = 0; j < spec.ny; ++j) {
        bool in_run = false;
        Complex prev_cp{};
        for (int i = 0; i < spec.nx; ++i) {
            const size_t idx = spec.index(i, j);
            if (domain_->mask[idx]) {
                in_run = false;
                continue;
            }
            const Complex diag{1.0 + delta_ * domain_->sigma_x[i], lap - dshift_};
            const Complex den = in_run ? diag - off * prev_cp : diag;
            const Complex invden = 1.0 / den;
            invden_x_[idx] = invden;
            prev_cp = off * invden;
            cp_x_[idx] = prev_cp;
            in_run = true;
        }
    }
    for (int i = 0; i < spec.nx; ++i) {
        bool in_run = false;
        Complex prev_cp{};
        for (int j = 0; j < spec.ny; ++j) {
            const size_t idx = spec.index(i, j);
            if (domain_->mask[idx]) {
                in_run = false;
                continue;
            }
            const Complex diag{1.0 + delta_ * domain_->sigma_y[j], lap};
            const Complex den = in_run ? diag - off * prev_cp : diag;
            const Complex invden = 1.0 / den;
            invden_y_[idx] = invden;
            prev_cp = off * invden;
            cp_y_[idx] = prev_cp;
            in_run = true;
        }
    }
}

void CrankNicolsonStepper::apply_m(const Complex* u, Complex* out) const {
    const GridSpec& spec = domain_->spec;
    const int nx = spec.nx, ny = spec.ny;
    const double lap4 = 4.0 * delta_ / (spec.dx * spec.dx) - dshift_;
    const double cei = -ce_.imag();  // +delta/dx^2
    const uint8_t* mask = domain_->mask.data();
    for (int j = 0; j < ny; ++j) {
        const double* row = reinterpret_cast<const double*>(u + spec.index(0, j));
        const double* rowN =
            j + 1 < ny ? reinterpret_cast<const double*>(u + spec.index(0, j + 1)) : nullptr;
        const double* rowS =
            j > 0 ? reinterpret_cast<const double*>(u + spec.index(0, j - 1)) : nullptr;
        double* orow = reinterpret_cast<double*>(out + spec.index(0, j));
        const uint8_t* mrow = mask + spec.index(0, j);
        const double sy = delta_ * domain_->sigma_y[j];
        const double* sx = domain_->sigma_x.data();
        for (int i = 0; i < nx; ++i) {
            if (mrow[i]) {
                orow[2 * i] = 0.0;
                orow[2 * i + 1] = 0.0;
                continue;
            }
            double nbr = 0.0, nbi = 0.0;
            if (i > 0) { nbr += row[2 * i - 2]; nbi += row[2 * i - 1]; }
            if (i + 1 < nx) { nbr += row[2 * i + 2]; nbi += row[2 * i + 3]; }
            if (rowN) { nbr += rowN[2 * i]; nbi += rowN[2 * i + 1]; }
            if (rowS) { nbr += rowS[2 * i]; nbi += rowS[2 * i + 1]; }
            const double dr = 1.0 + sy + delta_ * sx[i];
            const double zr = row[2 * i], zi = row[2 * i + 1];
            orow[2 * i] = dr * zr - lap4 * zi + cei * nbi;
            orow[2 * i + 1] = dr * zi + lap4 * zr - cei * nbr;
        }
    }
}

void CrankNicolsonStepper::compute_b(const Complex* u, const Complex* mu, Complex* b) const {
    const size_t n = domain_->spec.size();
    for (size_t k = 0; k < n; ++k) b[k] = 2.0 * u[k] - mu[k];
}

// Fused update: u += z (when u given), r -= M z, returns |r|^2 accumulated
// per row and summed in row order.
double CrankNicolsonStepper::update_residual(const Complex* zc, Complex* rc, Complex* uc) const {
    const GridSpec& spec = domain_->spec;
    const int nx = spec.nx, ny = spec.ny;
    const double lap4 = 4.0 * delta_ / (spec.dx * spec.dx) - dshift_;
    const double cei = -ce_.imag();
    const uint8_t* mask = domain_->mask.data();
    const double* sx = domain_->sigma_x.data();
    for (int j = 0; j < ny; ++j) {
        const double* __restrict z = reinterpret_cast<const double*>(zc + spec.index(0, j));
        const double* zN =
            j + 1 < ny ? reinterpret_cast<const double*>(zc + spec.index(0, j + 1)) : nullptr;
        const double* zS =
            j > 0 ? reinterpret_cast<const double*>(zc + spec.index(0, j - 1)) : nullptr;
        double* __restrict r = reinterpret_cast<double*>(rc + spec.index(0, j));
        double* __restrict uu = uc ? reinterpret_cast<double*>(uc + spec.index(0, j)) : nullptr;
        const double sy = delta_ * domain_->sigma_y[j];
        double acc = 0.0;
        if (!row_has_mask_[j] && zN && zS) {
            for (int i = 0; i < nx; ++i) {
                double nbr = zN[2 * i] + zS[2 * i];
                double nbi = zN[2 * i + 1] + zS[2 * i + 1];
                if (i > 0) { nbr += z[2 * i - 2]; nbi += z[2 * i - 1]; }
                if (i + 1 < nx) { nbr += z[2 * i + 2]; nbi += z[2 * i + 3]; }
                const double dr = 1.0 + sy + delta_ * sx[i];
                const double zr = z[2 * i], zi = z[2 * i + 1];
                const double rr = r[2 * i] - (dr * zr - lap4 * zi + cei * nbi);
                const double ri = r[2 * i + 1] - (dr * zi + lap4 * zr - cei * nbr);
                r[2 * i] = rr;
                r[2 * i + 1] = ri;
                acc += rr * rr + ri * ri;
                if (uu) { uu[2 * i] += zr; uu[2 * i + 1] += zi; }
            }
        } else {
            const uint8_t* mrow = mask + spec.index(0, j);
            for (int i = 0; i < nx; ++i) {
                if (mrow[i]) {
                    r[2 * i] = 0.0;
                    r[2 * i + 1] = 0.0;
                    continue;
                }
                double nbr = 0.0, nbi = 0.0;
                if (i > 0) { nbr += z[2 * i - 2]; nbi += z[2 * i - 1]; }
                if (i + 1 < nx) { nbr += z[2 * i + 2]; nbi += z[2 * i + 3]; }
                if (zN) { nbr += zN[2 * i]; nbi += zN[2 * i + 1]; }
                if (zS) { nbr += zS[2 * i]; nbi += zS[2 * i + 1]; }
                const double dr = 1.0 + sy + delta_ * sx[i];
                const double zr = z[2 * i], zi = z[2 * i + 1];
                const double rr = r[2 * i] - (dr * zr - lap4 * zi + cei * nbi);
                const double ri = r[2 * i + 1] - (dr * zi + lap4 * zr - cei * nbr);
                r[2 * i] = rr;
                r[2 * i + 1] = ri;
                acc += rr * rr + ri * ri;
                if (uu) { uu[2 * i] += zr; uu[2 * i + 1] += zi; }
            }
        }
        row_acc_[j] = acc;
    }
    double total = 0.0;
    for (int j = 0; j < ny; ++j) total += row_acc_[j];
    return total;
}

void CrankNicolsonStepper::adi_solve(const Complex* r, Complex* z) const {
    const GridSpec& spec = domain_->spec;
    const int nx = spec.nx, ny = spec.ny;
    const Complex off = ce_;
    const uint8_t* mask = domain_->mask.data();

    // x sweep: row-wise Thomas into z.
    for (int j = 0; j < ny; ++j) {
        const size_t base = spec.index(0, j);
        const Complex* __restrict rr = r + base;
        Complex* __restrict zz = z + base;
        const Complex* __restrict inv = invden_x_.data() + base;
        const Complex* __restrict cp = cp_x_.data() + base;
        if (!row_has_mask_[j]) {
            Complex prev = rr[0] * inv[0];
            zz[0] = prev;
            for (int i = 1; i < nx; ++i) {
                prev = (rr[i] - off * prev) * inv[i];
                zz[i] = prev;
            }
            for (int i = nx - 2; i >= 0; --i) zz[i] -= cp[i] * zz[i + 1];
            continue;
        }
        const uint8_t* mr = mask + base;
        bool in_run = false;
        Complex prev{};
        for (int i = 0; i < nx; ++i) {
            if (mr[i]) {
                zz[i] = Complex{0.0, 0.0};
                in_run = false;
                continue;
            }
            prev = in_run ? (rr[i] - off * prev) * inv[i] : rr[i] * inv[i];
            zz[i] = prev;
            in_run = true;
        }
        bool have_next = false;
        Complex next{};
        for (int i = nx - 1; i >= 0; --i) {
            if (mr[i]) {
                have_next = false;
                continue;
            }
            if (have_next) zz[i] -= cp[i] * next;
            next = zz[i];
            have_next = true;
        }
    }

    // y sweep in place over z, column blocks for locality.
    constexpr int kBlock = 512;
    Complex prev[kBlock];
    uint8_t run[kBlock];
    for (int i0 = 0; i0 < nx; i0 += kBlock) {
        const int bw = std::min(nx, i0 + kBlock) - i0;
        std::memset(run, 0, bw);
        for (int j = 0; j < ny; ++j) {
            const size_t base = spec.index(i0, j);
            Complex* __restrict zz = z + base;
            const Complex* __restrict inv = invden_y_.data() + base;
            const uint8_t* mr = mask + base;
            for (int b = 0; b < bw; ++b) {
                if (mr[b]) {
                    zz[b] = Complex{0.0, 0.0};
                    run[b] = 0;
                    continue;
                }
                const Complex g = run[b] ? (zz[b] - off * prev[b]) * inv[b] : zz[b] * inv[b];
                zz[b] = g;
                prev[b] = g;
                run[b] = 1;
            }
        }
        std::memset(run, 0, bw);
        for (int j = ny - 1; j >= 0; --j) {
            const size_t base = spec.index(i0, j);
            Complex* __restrict zz = z + base;
            const Complex* __restrict cp = cp_y_.data() + base;
            const uint8_t* mr = mask + base;
            for (int b = 0; b < bw; ++b) {
                if (mr[b]) {
                    run[b] = 0;
                    continue;
                }
                if (run[b]) zz[b] -= cp[b] * prev[b];
                prev[b] = zz[b];
                run[b] = 1;
            }
        }
    }
}

StepStats CrankNicolsonStepper::step(GridField& field) {
    const GridSpec& spec = domain_->spec;
    const size_t n = spec.size();
    if (field.values.size() != n) throw ValidationError("field does not match stepper grid");
    Complex* u = field.values.data();

    if (!have_mu_) {
        apply_m(u, mu_.data());
        have_mu_ = true;
    }
    compute_b(u, mu_.data(), b_.data());

    const Complex phi = std::polar(1.0, -opts_.carrier_omega * dt_);
    const Complex a1 = 2.0 * phi, a2 = phi * phi;
    double b_norm2 = 0.0;
    if (have_history_) {
        for (size_t k = 0; k < n; ++k) {
            const Complex x = a1 * u[k] - a2 * u_prev_[k];
            const Complex mx = a1 * mu_[k] - a2 * mu_prev_[k];
            r_[k] = b_[k] - mx;
            u_prev_[k] = u[k];
            u[k] = x;
            b_norm2 += std::norm(b_[k]);
        }
    } else {
        for (size_t k = 0; k < n; ++k) {
            r_[k] = b_[k] - mu_[k];
            u_prev_[k] = u[k];
            b_norm2 += std::norm(b_[k]);
        }
    }

    const double target2 = std::max(b_norm2 * opts_.tolerance * opts_.tolerance, 1e-300);
    double res2 = 0.0;
    for (size_t k = 0; k < n; ++k) res2 += std::norm(r_[k]);
    int it = 0;
    const double lap4 = 4.0 * delta_ / (spec.dx * spec.dx) - dshift_;
    // Jacobi correction z = w r / diag(M), applied to u in the same pass.
    auto jacobi_z_apply = [&](double w) {
        const double* sx = domain_->sigma_x.data();
        for (int j = 0; j < spec.ny; ++j) {
            const double sy = delta_ * domain_->sigma_y[j];
            const size_t base = spec.index(0, j);
            double* __restrict zz = reinterpret_cast<double*>(z_.data() + base);
            double* __restrict uu = reinterpret_cast<double*>(u + base);
            const double* __restrict rr = reinterpret_cast<const double*>(r_.data() + base);
            for (int i = 0; i < spec.nx; ++i) {
                const double dr = 1.0 + sy + delta_ * sx[i];
                const double inv = w / (dr * dr + lap4 * lap4);
                const double zr = inv * (rr[2 * i] * dr + rr[2 * i + 1] * lap4);
                const double zi = inv * (rr[2 * i + 1] * dr - rr[2 * i] * lap4);
                zz[2 * i] = zr;
                zz[2 * i + 1] = zi;
                uu[2 * i] += zr;
                uu[2 * i + 1] += zi;
            }
        }
    };
    while (res2 > target2) {
        if (it >= opts_.max_iterations)
            throw NumericalError("Crank-Nicolson inner solve did not reach residual " +
                                 format_double(opts_.tolerance) + " in " +
                                 std::to_string(opts_.max_iterations) + " iterations");
        adi_solve(r_.data(), z_.data());
        res2 = update_residual(z_.data(), r_.data(), u);
        ++it;
        for (double w : opts_.jacobi_weights) {
            if (res2 <= target2 || it >= opts_.max_iterations) break;
            jacobi_z_apply(w);
            res2 = update_residual(z_.data(), r_.data(), nullptr);
            ++it;
        }
    }

    std::swap(mu_prev_, mu_);
    for (size_t k = 0; k < n; ++k) mu_[k] = b_[k] - r_[k];

    StepStats stats;
    stats.iterations = it;
    stats.residual = b_norm2 > 0.0 ? std::sqrt(res2 / b_norm2) : 0.0;
    if (!absorber_spans_.empty()) {
        double acc = 0.0;
        for (const auto& sp : absorber_spans_) {
            const double sy = domain_->sigma_y[sp.j];
            const size_t base = spec.index(0, sp.j);
            const Complex* un = u + base;
            const Complex* uo = u_prev_.data() + base;
            double row = 0.0;
            for (int i = sp.i0; i < sp.i1; ++i) {
                const double s = domain_->sigma_x[i] + sy;
                if (s <= 0.0) continue;
                const Complex w = 0.5 * (un[i] + uo[i]);
                row += s * std::norm(w);
            }
            acc += row;
        }
        stats.absorbed = 4.0 * delta_ * acc * spec.cell_area();
    }
    have_history_ = true;
    field.time += dt_;
    return stats;
}

EvolveResult evolve(GridField& field, CrankNicolsonStepper& stepper, const EvolveOptions& opts) {
    if (!(opts.t_final > 0.0)) throw ValidationError("evolve requires t_final > 0");
    EvolveResult res;
    res.mass_initial = field_mass(field);
    const int total_steps = std::max(1, static_cast<int>(std::ceil(opts.t_final / opts.dt - 1e-12)));
    const int stride =
        opts.probe_stride_t > 0.0
            ? std::max(1, static_cast<int>(std::round(opts.probe_stride_t / opts.dt)))
            : 1;

    auto snap_left = opts.snapshot_times;
    std::sort(snap_left.begin(), snap_left.end());

    auto take_snapshots = [&](double t) {
        while (!snap_left.empty() && t + 1e-12 >= snap_left.front()) {
            res.snapshots.emplace_back(t, field);
            snap_left.erase(snap_left.begin());
        }
    };
    auto sample = [&](double t) {
        res.times.push_back(t);
        res.mass.push_back(res.mass_initial - res.absorbed_total);
        res.absorbed.push_back(res.absorbed_total);
        if (opts.probe) res.probes.push_back(opts.probe(field));
        if (opts.early_stop && opts.early_stop(t, res.mass.back(),
                                               opts.probe ? res.probes.back()
                                                          : std::vector<double>{}))
            return true;
        return false;
    };

    take_snapshots(0.0);
    bool stop = sample(0.0);
    for (int k = 0; k < total_steps && !stop; ++k) {
        const StepStats st = stepper.step(field);
        res.total_iterations += st.iterations;
        res.absorbed_total += st.absorbed;
        ++res.steps;
        take_snapshots(field.time);
        const bool at_sample = ((k + 1) % stride == 0) || (k + 1 == total_steps);
        if (at_sample) stop = sample(field.time);
    }
    res.early_stopped = stop;
    res.t_end = field.time;
    res.mass_final = field_mass(field);
    res.mass_drift = std::abs(res.mass_initial - res.mass_final - res.absorbed_total);
    return res;
}

SmoothingPair smoothing_observable_pair(const GridField& field, const CutoffSpec& chi,
                                        const Fft2D& fft) {
    const GridSpec& spec = field.spec();
    const size_t n = spec.size();
    std::vector<Complex> w(n);
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const size_t idx = spec.index(i, j);
            const double c = chi.chi(spec.node(i, j));
            w[idx] = c != 0.0 ? c * field.values[idx] : Complex{};
        }
    std::vector<Complex> wh(n);
    fft.forward(w.data(), wh.data());

    std::vector<double> xi2_x(spec.nx), xi2_y(spec.ny);
    for (int i = 0; i < spec.nx; ++i) {
        const double xi = fft_frequency(i, spec.nx, spec.dx);
        xi2_x[i] = xi * xi;
    }
    for (int j = 0; j < spec.ny; ++j) {
        const double xi = fft_frequency(j, spec.ny, spec.dx);
        xi2_y[j] = xi * xi;
    }
    double plain = 0.0, logloss = 0.0;
    for (int j = 0; j < spec.ny; ++j) {
        double p_acc = 0.0, l_acc = 0.0;
        const Complex* rowh = wh.data() + spec.index(0, j);
        for (int i = 0; i < spec.nx; ++i) {
            const double xi2 = xi2_x[i] + xi2_y[j];
            const double p = std::norm(rowh[i]) * std::sqrt(1.0 + xi2);
            p_acc += p;
            l_acc += p / std::max(1.0, std::log(2.0 + xi2));
        }
        plain += p_acc;
        logloss += l_acc;
    }
    const double scale = spec.cell_area() / static_cast<double>(n);
    return {plain * scale, logloss * scale};
}

double smoothing_observable(const GridField& field, const CutoffSpec& chi, SmoothingWeight wgt) {
    Fft2D fft(field.spec().nx, field.spec().ny);
    const SmoothingPair p = smoothing_observable_pair(field, chi, fft);
    return wgt == SmoothingWeight::PlainHalf ? p.plain : p.logloss;
}

}  // namespace extlab::schrodinger
