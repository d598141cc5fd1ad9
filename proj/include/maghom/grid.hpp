#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace maghom {

using Point = std::array<double, 3>;

enum class MeshKind { UnitCell, Box };

/// Structured Q1 mesh (quadrilaterals in 2D, hexahedra in 3D) over either the
/// periodic unit cell Y = (0,1)^d or a box domain prod (0, L_k).
///
/// Nodes live on the full (n+1)^d lattice so that element geometry is always
/// well defined. On unit-cell meshes the nodes on the faces y_k = 1 are slaves
/// of their images on y_k = 0; `dof_node` gives the compact index of the
/// master, which is what every DOF map is keyed on.
class PeriodicMesh {
public:
    struct BoundaryFace {
        int element;
        int axis;
        int side; // 0: x_axis = 0, 1: x_axis = L_axis
        Point normal;
    };

    int dim() const noexcept { return dim_; }
    int resolution() const noexcept { return n_; }
    MeshKind kind() const noexcept { return kind_; }
    bool periodic() const noexcept { return kind_ == MeshKind::UnitCell; }
    const Point& lengths() const noexcept { return lengths_; }
    double h(int axis) const noexcept { return h_[axis]; }
    double h_max() const noexcept;

    int num_nodes() const noexcept { return num_nodes_; }
    int num_elements() const noexcept { return num_elements_; }
    int nodes_per_element() const noexcept { return 1 << dim_; }
    int num_dof_nodes() const noexcept { return num_dof_nodes_; }
    double element_volume() const noexcept;
    double domain_volume() const noexcept;

    std::array<int, 3> node_lattice(int node) const noexcept;
    int node_at(const std::array<int, 3>& ijk) const noexcept;
    Point node_coords(int node) const noexcept;

    std::array<int, 3> element_lattice(int e) const noexcept;
    int element_at(const std::array<int, 3>& ijk) const noexcept;
    /// Lattice node of local vertex `local`; bit k of `local` selects the
    /// upper end along axis k.
    int element_node(int e, int local) const noexcept;
    Point element_origin(int e) const noexcept;
    Point element_centroid(int e) const noexcept;

    /// Lattice id of the periodic master (identity on box meshes).
    int master(int node) const noexcept;
    /// Compact index of the master node, in [0, num_dof_nodes()).
    int dof_node(int node) const noexcept;
    /// Lattice node representing compact index `dof` (its master).
    int node_of_dof(int dof) const noexcept;

    bool on_boundary(int node) const noexcept;
    std::vector<BoundaryFace> boundary_faces() const;

    /// Element containing x and the reference coordinates of x in it. Unit
    /// cells wrap x into [0,1)^d first; box meshes clamp to the closure.
    int locate(const Point& x, Point& ref) const noexcept;

private:
    friend PeriodicMesh build_unit_cell_mesh(int, int);
    friend PeriodicMesh build_box_mesh(int, const Point&, int);

    PeriodicMesh(int dim, int n, const Point& lengths, MeshKind kind);

    int dim_;
    int n_;
    Point lengths_;
    Point h_;
    MeshKind kind_;
    int num_nodes_;
    int num_elements_;
    int num_dof_nodes_;
};

PeriodicMesh build_unit_cell_mesh(int dim, int n);
PeriodicMesh build_box_mesh(int dim, const Point& lengths, int n);

enum class Phase : std::uint8_t { Fluid, Solid };

/// Per-element permeability and phase. `particle[e]` numbers the rigid
/// particles (one per periodic cell) and is -1 on fluid elements.
struct MaterialField {
    std::vector<double> mu;
    std::vector<Phase> phase;
    std::vector<int> particle;
    double contrast = 1.0;
    int num_particles = 0;

    bool has_solid() const noexcept { return num_particles > 0; }
    bool is_solid(int e) const noexcept { return phase[e] == Phase::Solid; }
    double mu_min() const;
    double mu_max() const;
};

struct GeometrySpec {
    enum class Shape { None, Disk, Layered, Checkerboard };

    Shape shape = Shape::None;
    // Disk (sphere in 3D): rigid particle, mu_secondary inside.
    double radius = 0.25;
    Point center{0.5, 0.5, 0.5};
    // Layered: mu_primary where y_axis < split, mu_secondary elsewhere.
    int axis = 0;
    double split = 0.5;
    // Checkerboard: mu_primary on the cells with even (floor(2y_1)+floor(2y_2)).
    double mu_primary = 1.0;
    double mu_secondary = 1.0;
    /// Contrast bound Lambda; when unset the tightest admissible value is used.
    std::optional<double> contrast;

    double resolved_contrast() const;
};

std::string to_string(GeometrySpec::Shape shape);
GeometrySpec::Shape shape_from_string(const std::string& name);

/// Centroid-based (staircase) material assignment on a unit-cell mesh.
MaterialField assign_material(const PeriodicMesh& mesh, const GeometrySpec& spec);

/// Periodic tiling of the cell geometry over a box mesh with cells of size
/// eps = 1/cells_per_unit (mu evaluated at x/eps mod 1, one particle per cell).
MaterialField tile_material(const PeriodicMesh& mesh, const GeometrySpec& spec, int cells_per_unit);

/// Fraction of the domain volume occupied by solid elements.
double solid_fraction(const PeriodicMesh& mesh, const MaterialField& material);

} // namespace maghom
