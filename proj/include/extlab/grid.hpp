#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "extlab/bump.hpp"
#include "extlab/core.hpp"
#include "extlab/geometry.hpp"

namespace extlab::schrodinger {

using geometry::SceneGeometry;
using Complex = std::complex<double>;

struct GridSpec {
    int nx = 0, ny = 0;   // interior node counts
    double dx = 0.0;      // square cells
    Vec2 origin;          // position of node (0, 0)

    size_t size() const { return static_cast<size_t>(nx) * ny; }
    size_t index(int i, int j) const { return static_cast<size_t>(j) * nx + i; }
    Vec2 node(int i, int j) const { return {origin.x + i * dx, origin.y + j * dx}; }
    double cell_area() const { return dx * dx; }
};

struct GridPolicy {
    double points_per_wavelength = 8.0;  // dx = 2*pi / (ppw * n)
    double absorber_frac = 0.15;         // of the smaller box dimension, per side
    double absorber_width = 0.0;         // absolute override when > 0
    double sigma_factor = 35.0;          // sigma_max = sigma_factor * n
    double sigma_max = -1.0;             // absolute override when >= 0
};

// Discretized truncated exterior domain: staircase Dirichlet mask over the
// obstacles plus a complex absorbing ramp in the outer margin.
struct DomainGrid {
    GridSpec spec;
    Rect box;
    std::vector<uint8_t> mask;    // 1 = obstacle node (hard Dirichlet), 0 = evolving
    std::vector<double> sigma_x;  // per-column absorber profile
    std::vector<double> sigma_y;  // per-row absorber profile
    std::vector<geometry::Obstacle> obstacles;
    double absorber_width = 0.0;
    double sigma_max = 0.0;
    int frequency = 0;  // the n this grid was resolved for

    bool absorbing() const { return sigma_max > 0.0; }
    double sigma_at(int i, int j) const { return sigma_x[i] + sigma_y[j]; }
    // True if z lies in the absorber margin.
    bool in_absorber(Vec2 z) const;
};

std::shared_ptr<const DomainGrid> build_grid(const SceneGeometry& scene, int n,
                                             const GridPolicy& policy);

struct GridField {
    std::shared_ptr<const DomainGrid> domain;
    std::vector<Complex> values;
    double time = 0.0;

    const GridSpec& spec() const { return domain->spec; }
};

GridField zero_field(std::shared_ptr<const DomainGrid> domain);

// Deterministic row-partial reduction of dx^2 sum |u|^2.
double field_mass(const GridField& field);

// Semiclassical wave packet n^{d/4} phi(sqrt n (z - z0)) e^{i n (z-z0).zeta0}
// with a normalized Gaussian envelope of width parameter w.
struct CoherentParams {
    int n = 64;
    Vec2 z0;
    Vec2 zeta0{1.0, 0.0};
    double envelope_width = 0.70710678118654752;  // 1/sqrt(2)
};

GridField coherent_state(const CoherentParams& params, std::shared_ptr<const DomainGrid> domain);

}  // namespace extlab::schrodinger
