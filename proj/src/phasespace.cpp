#include "extlab/phasespace.hpp"

#include <algorithm>
#include <cmath>

#include "extlab/fft.hpp"

namespace extlab::phasespace {

namespace {

// Next size whose factors are all in {2,3,5,7} (fast FFTW sizes).
int next_fast_size(int n) {
    for (;; ++n) {
        int m = n;
        for (int f : {2, 3, 5, 7})
            while (m % f == 0) m /= f;
        if (m == 1) return n;
    }
}

}  // namespace

HusimiField husimi(const GridField& field, double h, const PhaseWindow& window) {
    if (!(h > 0.0)) throw ValidationError("husimi requires h > 0");
    const schrodinger::GridSpec& spec = field.spec();
    const double rh = std::sqrt(h);
    const double dx = spec.dx;

    // Gaussian frame truncated at 4.5 widths (relative amplitude 4e-5).
    const int P = std::max(4, static_cast<int>(std::ceil(4.5 * rh / dx)));
    const int np = next_fast_size(2 * P + 1);
    if (np > 4096) throw ValidationError("husimi window under-resolved: patch too large");

    HusimiField out;
    out.h = h;
    const int stride = std::max(1, static_cast<int>(std::round(window.z_stride_frames * rh / dx)));
    out.dz = stride * dx;

    // Spatial sample nodes inside the window, snapped to the field grid.
    const int i_lo = std::max(0, static_cast<int>(std::ceil((window.z.lo.x - spec.origin.x) / dx)));
    const int j_lo = std::max(0, static_cast<int>(std::ceil((window.z.lo.y - spec.origin.y) / dx)));
    const int i_hi = std::min(spec.nx - 1,
                              static_cast<int>(std::floor((window.z.hi.x - spec.origin.x) / dx)));
    const int j_hi = std::min(spec.ny - 1,
                              static_cast<int>(std::floor((window.z.hi.y - spec.origin.y) / dx)));
    if (i_hi < i_lo || j_hi < j_lo) throw ValidationError("husimi z window misses the grid");
    out.nzx = (i_hi - i_lo) / stride + 1;
    out.nzy = (j_hi - j_lo) / stride + 1;
    out.z0 = spec.node(i_lo, j_lo);

    // Momentum lattice: FFT bins of the patch mapped to zeta = 2 pi k h / (np dx).
    out.dzeta = kTwoPi * h / (np * dx);
    const int k_lo = static_cast<int>(std::ceil(window.zeta.lo.x / out.dzeta));
    const int k_hi = static_cast<int>(std::floor(window.zeta.hi.x / out.dzeta));
    const int l_lo = static_cast<int>(std::ceil(window.zeta.lo.y / out.dzeta));
    const int l_hi = static_cast<int>(std::floor(window.zeta.hi.y / out.dzeta));
    if (k_hi < k_lo || l_hi < l_lo || k_hi - k_lo >= np || l_hi - l_lo >= np)
        throw ValidationError("husimi zeta window not resolvable by the patch lattice");
    out.nkx = k_hi - k_lo + 1;
    out.nky = l_hi - l_lo + 1;
    out.zeta0 = {k_lo * out.dzeta, l_lo * out.dzeta};

    out.values.assign(static_cast<size_t>(out.nzx) * out.nzy * out.nkx * out.nky, 0.0);

    std::vector<double> gauss(2 * P + 1);
    for (int p = -P; p <= P; ++p)
        gauss[p + P] = std::exp(-(static_cast<double>(p) * p * dx * dx) / (2.0 * h));

    Fft2D fft(np, np);
    std::vector<schrodinger::Complex> patch(static_cast<size_t>(np) * np);
    std::vector<schrodinger::Complex> spectrum(patch.size());
    const double amp = dx * dx / (std::sqrt(kPi * h));  // dx^2 (pi h)^{-1/2} per sample
    const double husimi_scale = 1.0 / (kTwoPi * h * kTwoPi * h);

    for (int jz = 0; jz < out.nzy; ++jz) {
        const int j = j_lo + jz * stride;
        for (int iz = 0; iz < out.nzx; ++iz) {
            const int i = i_lo + iz * stride;
            std::fill(patch.begin(), patch.end(), schrodinger::Complex{});
            for (int q = -P; q <= P; ++q) {
                const int jj = j + q;
                if (jj < 0 || jj >= spec.ny) continue;
                const double gq = gauss[q + P];
                const int fq = (q % np + np) % np;
                for (int p = -P; p <= P; ++p) {
                    const int ii = i + p;
                    if (ii < 0 || ii >= spec.nx) continue;
                    const int fp = (p % np + np) % np;
                    patch[static_cast<size_t>(fq) * np + fp] =
                        field.values[spec.index(ii, jj)] * (gq * gauss[p + P]);
                }
            }
            fft.forward(patch.data(), spectrum.data());
            for (int jk = 0; jk < out.nky; ++jk) {
                const int l = l_lo + jk;
                const int fl = (l % np + np) % np;
                for (int ik = 0; ik < out.nkx; ++ik) {
                    const int k = k_lo + ik;
                    const int fk = (k % np + np) % np;
                    const auto G = spectrum[static_cast<size_t>(fl) * np + fk];
                    out.values[out.index(iz, jz, ik, jk)] =
                        std::norm(G) * amp * amp * husimi_scale;
                }
            }
        }
    }
    double total = 0.0;
    for (double v : out.values) total += v;
    out.total = total * out.dz * out.dz * out.dzeta * out.dzeta;
    return out;
}

MassNearResult measure_mass_near(const HusimiField& h, PhasePoint p, double radius) {
    double inside = 0.0, total = 0.0;
    const double r2 = radius * radius;
    for (int jz = 0; jz < h.nzy; ++jz) {
        const double zy = h.z0.y + jz * h.dz;
        for (int iz = 0; iz < h.nzx; ++iz) {
            const double zx = h.z0.x + iz * h.dz;
            const double dz2 = (zx - p.z.x) * (zx - p.z.x) + (zy - p.z.y) * (zy - p.z.y);
            for (int jk = 0; jk < h.nky; ++jk) {
                const double ky = h.zeta0.y + jk * h.dzeta;
                const double dy2 = (ky - p.zeta.y) * (ky - p.zeta.y);
                for (int ik = 0; ik < h.nkx; ++ik) {
                    const double kx = h.zeta0.x + ik * h.dzeta;
                    const double v = h.values[h.index(iz, jz, ik, jk)];
                    total += v;
                    const double d2 =
                        dz2 + dy2 + (kx - p.zeta.x) * (kx - p.zeta.x);
                    if (d2 <= r2) inside += v;
                }
            }
        }
    }
    if (total <= 1e-300) return {0.0, true};
    return {inside / total, false};
}

PropagationCheck check_propagation(const std::vector<std::pair<double, GridField>>& snapshots,
                                   PhasePoint start, int n,
                                   const geometry::SceneGeometry& scene,
                                   const PhaseWindow& window,
                                   const PropagationCheckConfig& cfg) {
    if (snapshots.size() < cfg.checkpoints_s.size())
        throw ValidationError("check_propagation: fewer snapshots than checkpoints");
    const double h = 1.0 / n;
    PropagationCheck out;
    out.horizon = cfg.ehrenfest_c * std::log(static_cast<double>(n));

    PhasePoint p0 = start;
    if (cfg.direction == billiard::FlowDirection::Backward) p0.zeta = -p0.zeta;

    double min_frac = 2.0;
    for (size_t k = 0; k < cfg.checkpoints_s.size(); ++k) {
        const double s = cfg.checkpoints_s[k];
        PhasePoint ref = p0;
        if (s > 0.0) {
            const auto traj = billiard::flow(p0, s, scene);
            if (traj.terminal == billiard::TerminalKind::GlancingAbort)
                throw NumericalError("check_propagation: reference trajectory glances");
            ref = traj.state_end;
            if (traj.terminal == billiard::TerminalKind::Escaped)
                ref.z += ref.zeta * (2.0 * (s - traj.s_end));  // straight continuation
        }
        const HusimiField hf = husimi(snapshots[k].second, h, window);
        const auto mass = measure_mass_near(hf, ref, cfg.radius_frames * std::sqrt(h));
        PropagationCheckpoint cp;
        cp.s = s;
        cp.reference = ref;
        cp.fraction = mass.fraction;
        cp.within_horizon = s <= out.horizon + 1e-12;
        out.checkpoints.push_back(cp);
        if (cp.within_horizon) min_frac = std::min(min_frac, cp.fraction);
    }
    out.min_fraction = min_frac <= 1.0 ? min_frac : 0.0;
    out.pass = !out.checkpoints.empty() && min_frac <= 1.0 && min_frac >= cfg.threshold;
    return out;
}

}  // namespace extlab::phasespace
