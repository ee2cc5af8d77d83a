#include "extlab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace extlab::schrodinger {

bool DomainGrid::in_absorber(Vec2 z) const {
    const double d = std::min(std::min(z.x - box.lo.x, box.hi.x - z.x),
                              std::min(z.y - box.lo.y, box.hi.y - z.y));
    return d < absorber_width;
}

std::shared_ptr<const DomainGrid> build_grid(const SceneGeometry& scene, int n,
                                             const GridPolicy& policy) {
    if (n <= 0) throw ValidationError("grid frequency n must be positive");
    if (!(policy.points_per_wavelength > 0.0))
        throw ValidationError("points_per_wavelength must be positive");
    auto grid = std::make_shared<DomainGrid>();
    grid->frequency = n;
    grid->obstacles = scene.obstacles;
    const double dx = kTwoPi / (policy.points_per_wavelength * n);

    // Snap the box outward to a whole number of cells, centered on the scene.
    const Rect want = scene.bounding_box;
    const int mx = std::max(4, static_cast<int>(std::ceil(want.width() / dx)));
    const int my = std::max(4, static_cast<int>(std::ceil(want.height() / dx)));
    const Vec2 c = want.center();
    grid->box = Rect{{c.x - mx * dx / 2.0, c.y - my * dx / 2.0},
                     {c.x + mx * dx / 2.0, c.y + my * dx / 2.0}};
    GridSpec spec;
    spec.nx = mx - 1;
    spec.ny = my - 1;
    spec.dx = dx;
    spec.origin = {grid->box.lo.x + dx, grid->box.lo.y + dx};
    grid->spec = spec;
    if (spec.size() > 40u * 1000u * 1000u)
        throw ValidationError("grid exceeds the resolution budget (" + std::to_string(spec.nx) +
                              "x" + std::to_string(spec.ny) + " nodes)");

    grid->mask.assign(spec.size(), 0);
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const Vec2 z = spec.node(i, j);
            for (const auto& o : scene.obstacles) {
                if (geometry::signed_distance_and_normal(o, z).distance <= 0.0) {
                    grid->mask[spec.index(i, j)] = 1;
                    break;
                }
            }
        }

    double width = policy.absorber_width > 0.0
                       ? policy.absorber_width
                       : policy.absorber_frac * std::min(grid->box.width(), grid->box.height());
    width = std::min(width, 0.45 * std::min(grid->box.width(), grid->box.height()));
    grid->absorber_width = width;
    grid->sigma_max = policy.sigma_max >= 0.0 ? policy.sigma_max : policy.sigma_factor * n;
    grid->sigma_x.assign(spec.nx, 0.0);
    grid->sigma_y.assign(spec.ny, 0.0);
    if (width > 0.0 && grid->sigma_max > 0.0) {
        for (int i = 0; i < spec.nx; ++i) {
            const double x = spec.origin.x + i * dx;
            const double d = std::min(x - grid->box.lo.x, grid->box.hi.x - x);
            if (d < width) {
                const double t = (width - d) / width;
                grid->sigma_x[i] = grid->sigma_max * t * t;
            }
        }
        for (int j = 0; j < spec.ny; ++j) {
            const double y = spec.origin.y + j * dx;
            const double d = std::min(y - grid->box.lo.y, grid->box.hi.y - y);
            if (d < width) {
                const double t = (width - d) / width;
                grid->sigma_y[j] = grid->sigma_max * t * t;
            }
        }
    } else {
        grid->sigma_max = 0.0;
    }
    return grid;
}

GridField zero_field(std::shared_ptr<const DomainGrid> domain) {
    GridField f;
    f.values.assign(domain->spec.size(), Complex{0.0, 0.0});
    f.domain = std::move(domain);
    return f;
}

double field_mass(const GridField& field) {
    const GridSpec& spec = field.spec();
    double total = 0.0;
    for (int j = 0; j < spec.ny; ++j) {
        const Complex* row = field.values.data() + spec.index(0, j);
        double acc = 0.0;
        for (int i = 0; i < spec.nx; ++i) acc += std::norm(row[i]);
        total += acc;
    }
    return total * spec.cell_area();
}

GridField coherent_state(const CoherentParams& params, std::shared_ptr<const DomainGrid> domain) {
    const GridSpec& spec = domain->spec;
    if (spec.dx > kTwoPi / (8.0 * params.n) * (1.0 + 1e-12))
        throw ValidationError("grid under-resolves the requested coherent state frequency");
    if (std::abs(params.zeta0.norm() - 1.0) > 1e-9)
        throw ValidationError("coherent state requires |zeta0| = 1");
    if (!(params.envelope_width > 0.0)) throw ValidationError("envelope width must be positive");

    const double rn = std::sqrt(static_cast<double>(params.n));
    const double w = params.envelope_width;
    // Envelope clearance: 4.5 scaled widths leave < 1e-8 of the mass beyond
    // an obstacle, inside the on-grid normalization tolerance.
    const double clearance = 4.5 * w / rn;
    for (const auto& o : domain->obstacles)
        if (geometry::signed_distance_and_normal(o, params.z0).distance < clearance)
            throw ValidationError("coherent state envelope overlaps an obstacle");
    if (params.z0.x - clearance < domain->box.lo.x || params.z0.x + clearance > domain->box.hi.x ||
        params.z0.y - clearance < domain->box.lo.y || params.z0.y + clearance > domain->box.hi.y)
        throw ValidationError("coherent state envelope leaves the computational box");

    GridField f = zero_field(domain);
    // n^{d/4} phi(sqrt n (z - z0)) e^{i n (z - z0).zeta0}, d = 2,
    // phi(y) = (w^2 pi)^{-1/2} exp(-|y|^2 / (2 w^2)).
    const double amp = rn / (w * std::sqrt(kPi));
    for (int j = 0; j < spec.ny; ++j) {
        for (int i = 0; i < spec.nx; ++i) {
            const size_t idx = spec.index(i, j);
            if (domain->mask[idx]) continue;
            const Vec2 d = spec.node(i, j) - params.z0;
            const double y2 = params.n * d.norm2();
            if (y2 > 2.0 * w * w * 700.0) continue;  // exp underflow guard
            const double env = amp * std::exp(-y2 / (2.0 * w * w));
            const double phase = params.n * d.dot(params.zeta0);
            f.values[idx] = Complex{env * std::cos(phase), env * std::sin(phase)};
        }
    }
    const double m = field_mass(f);
    if (!(m > 0.0)) throw ValidationError("coherent state has no support on the grid");
    const double scale = 1.0 / std::sqrt(m);
    for (auto& v : f.values) v *= scale;
    return f;
}

}  // namespace extlab::schrodinger
