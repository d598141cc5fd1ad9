#include "maghom/grid.hpp"

#include "maghom/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace maghom {

namespace {

int ipow(int base, int exp) {
    int r = 1;
    for (int k = 0; k < exp; ++k) r *= base;
    return r;
}

void check_resolution(int dim, int n) {
    if (dim != 2 && dim != 3)
        throw InvalidResolution("dimension must be 2 or 3, got " + std::to_string(dim));
    if (n < 4) throw InvalidResolution("resolution n must be >= 4, got " + std::to_string(n));
}

} // namespace

PeriodicMesh::PeriodicMesh(int dim, int n, const Point& lengths, MeshKind kind)
    : dim_(dim), n_(n), lengths_(lengths), h_{0.0, 0.0, 0.0}, kind_(kind) {
    for (int k = 0; k < 3; ++k) {
        if (k >= dim) lengths_[k] = 1.0;
        h_[k] = k < dim ? lengths_[k] / n : 1.0;
    }
    num_nodes_ = ipow(n + 1, dim);
    num_elements_ = ipow(n, dim);
    num_dof_nodes_ = periodic() ? ipow(n, dim) : num_nodes_;
}

PeriodicMesh build_unit_cell_mesh(int dim, int n) {
    check_resolution(dim, n);
    return PeriodicMesh(dim, n, Point{1.0, 1.0, 1.0}, MeshKind::UnitCell);
}

PeriodicMesh build_box_mesh(int dim, const Point& lengths, int n) {
    check_resolution(dim, n);
    for (int k = 0; k < dim; ++k) {
        if (!(lengths[k] > 0.0) || !std::isfinite(lengths[k]))
            throw InvalidResolution("box extents must be positive, axis " + std::to_string(k + 1) +
                                    " has length " + std::to_string(lengths[k]));
    }
    return PeriodicMesh(dim, n, lengths, MeshKind::Box);
}

double PeriodicMesh::h_max() const noexcept {
    double h = 0.0;
    for (int k = 0; k < dim_; ++k) h = std::max(h, h_[k]);
    return h;
}

double PeriodicMesh::element_volume() const noexcept {
    double v = 1.0;
    for (int k = 0; k < dim_; ++k) v *= h_[k];
    return v;
}

double PeriodicMesh::domain_volume() const noexcept {
    double v = 1.0;
    for (int k = 0; k < dim_; ++k) v *= lengths_[k];
    return v;
}

std::array<int, 3> PeriodicMesh::node_lattice(int node) const noexcept {
    std::array<int, 3> ijk{0, 0, 0};
    for (int k = 0; k < dim_; ++k) {
        ijk[k] = node % (n_ + 1);
        node /= (n_ + 1);
    }
    return ijk;
}

int PeriodicMesh::node_at(const std::array<int, 3>& ijk) const noexcept {
    int id = 0;
    for (int k = dim_ - 1; k >= 0; --k) id = id * (n_ + 1) + ijk[k];
    return id;
}

Point PeriodicMesh::node_coords(int node) const noexcept {
    const auto ijk = node_lattice(node);
    Point x{0.0, 0.0, 0.0};
    for (int k = 0; k < dim_; ++k) x[k] = ijk[k] == n_ ? lengths_[k] : ijk[k] * h_[k];
    return x;
}

std::array<int, 3> PeriodicMesh::element_lattice(int e) const noexcept {
    std::array<int, 3> ijk{0, 0, 0};
    for (int k = 0; k < dim_; ++k) {
        ijk[k] = e % n_;
        e /= n_;
    }
    return ijk;
}

int PeriodicMesh::element_at(const std::array<int, 3>& ijk) const noexcept {
    int id = 0;
    for (int k = dim_ - 1; k >= 0; --k) id = id * n_ + ijk[k];
    return id;
}

int PeriodicMesh::element_node(int e, int local) const noexcept {
    auto ijk = element_lattice(e);
    for (int k = 0; k < dim_; ++k) ijk[k] += (local >> k) & 1;
    return node_at(ijk);
}

Point PeriodicMesh::element_origin(int e) const noexcept {
    const auto ijk = element_lattice(e);
    Point x{0.0, 0.0, 0.0};
    for (int k = 0; k < dim_; ++k) x[k] = ijk[k] * h_[k];
    return x;
}

Point PeriodicMesh::element_centroid(int e) const noexcept {
    Point x = element_origin(e);
    for (int k = 0; k < dim_; ++k) x[k] += 0.5 * h_[k];
    return x;
}

int PeriodicMesh::master(int node) const noexcept {
    if (!periodic()) return node;
    auto ijk = node_lattice(node);
    for (int k = 0; k < dim_; ++k)
        if (ijk[k] == n_) ijk[k] = 0;
    return node_at(ijk);
}

int PeriodicMesh::dof_node(int node) const noexcept {
    if (!periodic()) return node;
    const auto ijk = node_lattice(node);
    int id = 0;
    for (int k = dim_ - 1; k >= 0; --k) id = id * n_ + (ijk[k] % n_);
    return id;
}

int PeriodicMesh::node_of_dof(int dof) const noexcept {
    if (!periodic()) return dof;
    std::array<int, 3> ijk{0, 0, 0};
    for (int k = 0; k < dim_; ++k) {
        ijk[k] = dof % n_;
        dof /= n_;
    }
    return node_at(ijk);
}

bool PeriodicMesh::on_boundary(int node) const noexcept {
    if (periodic()) return false;
    const auto ijk = node_lattice(node);
    for (int k = 0; k < dim_; ++k)
        if (ijk[k] == 0 || ijk[k] == n_) return true;
    return false;
}

std::vector<PeriodicMesh::BoundaryFace> PeriodicMesh::boundary_faces() const {
    std::vector<BoundaryFace> faces;
    if (periodic()) return faces;
    for (int e = 0; e < num_elements_; ++e) {
        const auto ijk = element_lattice(e);
        for (int k = 0; k < dim_; ++k) {
            for (int side = 0; side < 2; ++side) {
                if (ijk[k] != (side == 0 ? 0 : n_ - 1)) continue;
                Point normal{0.0, 0.0, 0.0};
                normal[k] = side == 0 ? -1.0 : 1.0;
                faces.push_back({e, k, side, normal});
            }
        }
    }
    return faces;
}

int PeriodicMesh::locate(const Point& x, Point& ref) const noexcept {
    std::array<int, 3> ijk{0, 0, 0};
    ref = {0.0, 0.0, 0.0};
    for (int k = 0; k < dim_; ++k) {
        double xk = x[k];
        if (periodic()) {
            xk -= std::floor(xk);
            if (xk >= 1.0) xk = 0.0;
        } else {
            xk = std::clamp(xk, 0.0, lengths_[k]);
        }
        const double s = xk / h_[k];
        int i = static_cast<int>(std::floor(s));
        i = std::clamp(i, 0, n_ - 1);
        ijk[k] = i;
        ref[k] = std::clamp(s - i, 0.0, 1.0);
    }
    return element_at(ijk);
}

double MaterialField::mu_min() const { return *std::min_element(mu.begin(), mu.end()); }
double MaterialField::mu_max() const { return *std::max_element(mu.begin(), mu.end()); }

double GeometrySpec::resolved_contrast() const {
    if (contrast) return *contrast;
    double lambda = std::max(mu_primary, 1.0 / mu_primary);
    if (shape != Shape::None) lambda = std::max({lambda, mu_secondary, 1.0 / mu_secondary});
    return lambda;
}

std::string to_string(GeometrySpec::Shape shape) {
    switch (shape) {
    case GeometrySpec::Shape::None: return "none";
    case GeometrySpec::Shape::Disk: return "disk";
    case GeometrySpec::Shape::Layered: return "layered";
    case GeometrySpec::Shape::Checkerboard: return "checkerboard";
    }
    return "none";
}

GeometrySpec::Shape shape_from_string(const std::string& name) {
    if (name == "none") return GeometrySpec::Shape::None;
    if (name == "disk" || name == "sphere") return GeometrySpec::Shape::Disk;
    if (name == "layered") return GeometrySpec::Shape::Layered;
    if (name == "checkerboard") return GeometrySpec::Shape::Checkerboard;
    throw InvalidGeometry("unknown geometry shape '" + name + "'");
}

namespace {

constexpr double kSnapTol = 1e-9;

/// Shared implementation: the mesh is tiled by `cells[k]` periodic cells per
/// axis, each resolved by `per_cell[k]` elements.
MaterialField assign_tiled(const PeriodicMesh& mesh, const GeometrySpec& spec,
                           const std::array<int, 3>& cells) {
    const int d = mesh.dim();
    const int n = mesh.resolution();
    std::array<int, 3> per_cell{1, 1, 1};
    for (int k = 0; k < d; ++k) {
        if (cells[k] <= 0 || n % cells[k] != 0)
            throw InvalidGeometry("mesh resolution " + std::to_string(n) +
                                  " is not a multiple of the cell count " + std::to_string(cells[k]));
        per_cell[k] = n / cells[k];
    }

    const double lambda = spec.resolved_contrast();
    if (!(lambda >= 1.0))
        throw ContrastViolation("contrast bound must be >= 1, got " + std::to_string(lambda));
    auto check_mu = [&](double mu) {
        if (!(mu > 0.0) || mu < 1.0 / lambda * (1.0 - 1e-12) || mu > lambda * (1.0 + 1e-12))
            throw ContrastViolation("permeability " + std::to_string(mu) + " outside [1/Lambda, Lambda] with Lambda = " +
                                    std::to_string(lambda));
    };
    check_mu(spec.mu_primary);
    if (spec.shape != GeometrySpec::Shape::None) check_mu(spec.mu_secondary);

    if (spec.shape == GeometrySpec::Shape::Layered) {
        if (spec.axis < 0 || spec.axis >= d)
            throw InvalidGeometry("layer normal axis out of range");
        const double s = spec.split * per_cell[spec.axis];
        if (!(spec.split > 0.0 && spec.split < 1.0) || std::abs(s - std::round(s)) > kSnapTol)
            throw InvalidGeometry("layer split " + std::to_string(spec.split) + " does not fall on a grid line");
    }
    if (spec.shape == GeometrySpec::Shape::Checkerboard) {
        for (int k = 0; k < d; ++k)
            if (per_cell[k] % 2 != 0) throw InvalidGeometry("checkerboard requires an even resolution per cell");
    }
    if (spec.shape == GeometrySpec::Shape::Disk && !(spec.radius > 0.0))
        throw InvalidGeometry("disk radius must be positive");

    const int ne = mesh.num_elements();
    MaterialField field;
    field.mu.assign(ne, spec.mu_primary);
    field.phase.assign(ne, Phase::Fluid);
    field.particle.assign(ne, -1);
    field.contrast = lambda;

    // cell-linear index -> particle id, in cell order for determinism
    std::map<int, int> cell_particle;
    std::vector<int> cell_of_element(ne, 0);

    for (int e = 0; e < ne; ++e) {
        const auto ijk = mesh.element_lattice(e);
        Point y{0.5, 0.5, 0.5};
        int cell = 0;
        for (int k = d - 1; k >= 0; --k) {
            const int c = ijk[k] / per_cell[k];
            const int local = ijk[k] % per_cell[k];
            y[k] = (local + 0.5) / per_cell[k];
            cell = cell * cells[k] + c;
        }
        cell_of_element[e] = cell;

        switch (spec.shape) {
        case GeometrySpec::Shape::None: break;
        case GeometrySpec::Shape::Layered:
            if (y[spec.axis] >= spec.split) field.mu[e] = spec.mu_secondary;
            break;
        case GeometrySpec::Shape::Checkerboard: {
            int parity = 0;
            for (int k = 0; k < d; ++k) parity += static_cast<int>(std::floor(2.0 * y[k]));
            if (parity % 2 != 0) field.mu[e] = spec.mu_secondary;
            break;
        }
        case GeometrySpec::Shape::Disk: {
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) r2 += (y[k] - spec.center[k]) * (y[k] - spec.center[k]);
            if (r2 < spec.radius * spec.radius) {
                field.mu[e] = spec.mu_secondary;
                field.phase[e] = Phase::Solid;
                // 2h-interior rule, measured in cell coordinates
                for (int k = 0; k < d; ++k) {
                    const double hy = 1.0 / per_cell[k];
                    const double lo = (ijk[k] % per_cell[k]) * hy;
                    const double gap = std::min(lo, 1.0 - (lo + hy));
                    if (gap < 2.0 * hy - 1e-12)
                        throw SolidTouchesBoundary("solid element at distance " + std::to_string(gap) +
                                                   " from the cell boundary (need >= 2h = " +
                                                   std::to_string(2.0 * hy) + ")");
                }
                cell_particle.emplace(cell, 0);
            }
            break;
        }
        }
    }

    int next = 0;
    for (auto& [cell, id] : cell_particle) id = next++;
    field.num_particles = next;
    for (int e = 0; e < ne; ++e)
        if (field.phase[e] == Phase::Solid) field.particle[e] = cell_particle.at(cell_of_element[e]);

    // one connected solid component per cell
    if (field.num_particles > 0) {
        std::vector<int> component(ne, -1);
        std::vector<int> seen_for_particle(field.num_particles, 0);
        for (int e0 = 0; e0 < ne; ++e0) {
            if (field.phase[e0] != Phase::Solid || component[e0] >= 0) continue;
            const int pid = field.particle[e0];
            if (++seen_for_particle[pid] > 1)
                throw InvalidGeometry("solid region of particle " + std::to_string(pid) + " is not connected");
            std::vector<int> stack{e0};
            component[e0] = pid;
            while (!stack.empty()) {
                const int e = stack.back();
                stack.pop_back();
                const auto ijk = mesh.element_lattice(e);
                for (int k = 0; k < d; ++k) {
                    for (int s : {-1, 1}) {
                        auto nb = ijk;
                        nb[k] += s;
                        if (nb[k] < 0 || nb[k] >= n) continue;
                        const int f = mesh.element_at(nb);
                        if (field.phase[f] == Phase::Solid && component[f] < 0 && field.particle[f] == pid) {
                            component[f] = pid;
                            stack.push_back(f);
                        }
                    }
                }
            }
        }
    }
    return field;
}

} // namespace

MaterialField assign_material(const PeriodicMesh& mesh, const GeometrySpec& spec) {
    if (spec.shape != GeometrySpec::Shape::None && !mesh.periodic())
        throw InvalidGeometry("shaped geometries require a unit-cell mesh; use tile_material for box domains");
    return assign_tiled(mesh, spec, {1, 1, 1});
}

MaterialField tile_material(const PeriodicMesh& mesh, const GeometrySpec& spec, int cells_per_unit) {
    std::array<int, 3> cells{1, 1, 1};
    for (int k = 0; k < mesh.dim(); ++k) {
        const double c = mesh.lengths()[k] * cells_per_unit;
        if (std::abs(c - std::round(c)) > kSnapTol)
            throw InvalidGeometry("domain length is not a whole number of cells");
        cells[k] = static_cast<int>(std::round(c));
    }
    return assign_tiled(mesh, spec, cells);
}

double solid_fraction(const PeriodicMesh& mesh, const MaterialField& material) {
    int count = 0;
    for (int e = 0; e < mesh.num_elements(); ++e)
        if (material.is_solid(e)) ++count;
    return count * mesh.element_volume() / mesh.domain_volume();
}

} // namespace maghom
