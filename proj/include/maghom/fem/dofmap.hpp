#pragma once

#include "maghom/fem/sparse.hpp"
#include "maghom/grid.hpp"

#include <cstdint>
#include <vector>

namespace maghom::fem {

enum class Role : std::uint8_t { Free, Dirichlet, Rigid };

/// Maps (node, component) pairs of a mesh to reduced unknowns.
///
/// The full space is indexed by compact DOF node (periodic slaves already
/// folded onto their masters) times component. Every DOF node is exactly one
/// of free / Dirichlet (value 0) / rigid. Rigid nodes of a group carry the
/// velocity U + R x (x - C), where U and R are the group's reduced unknowns.
/// Zero-mean (quotient) conditions are not eliminated; they are exposed as
/// kernel vectors which the solvers project out.
class DofMap {
public:
    struct RigidGroup {
        std::vector<int> nodes; // compact DOF nodes
        Point center;
        int offset = 0; // first reduced index: d translations, then rotations
    };

    DofMap(const PeriodicMesh& mesh, int components);

    int components() const noexcept { return components_; }
    int full_size() const noexcept { return static_cast<int>(role_.size()) * components_; }
    int reduced_size() const noexcept { return reduced_size_; }
    int rotations() const noexcept { return dim_ == 2 ? 1 : 3; }
    int rigid_dofs_per_group() const noexcept { return dim_ + rotations(); }

    void set_dirichlet(int dof_node);
    /// Fixes a single component of an otherwise free node.
    void set_dirichlet(int dof_node, int comp);
    void set_dirichlet_boundary(const PeriodicMesh& mesh);
    /// Returns the group index.
    int add_rigid_group(const std::vector<int>& dof_nodes, const Point& center);
    void finalize();

    Role role(int dof_node) const noexcept { return role_[dof_node]; }
    int group_of(int dof_node) const noexcept { return group_[dof_node]; }
    const std::vector<RigidGroup>& groups() const noexcept { return groups_; }
    int free_index(int dof_node, int comp) const noexcept { return free_index_[dof_node * components_ + comp]; }
    int num_free_dofs() const noexcept { return num_free_; }
    int num_dirichlet_nodes() const noexcept;

    /// Full = P * reduced (+ lift). Column-major, full_size x reduced_size.
    const Eigen::SparseMatrix<double>& prolongation() const;

    Vec expand(const Vec& reduced) const { return prolongation() * reduced; }

    /// Reduced constant modes (one per component) when no Dirichlet node
    /// exists; empty otherwise.
    std::vector<Vec> kernel() const;

    /// Translational and rotational velocity of a group from a reduced vector.
    Vec rigid_translation(int group, const Vec& reduced) const;
    Vec rigid_rotation(int group, const Vec& reduced) const;

private:
    void require_finalized() const;
    void require_open() const;

    int dim_;
    int components_;
    std::vector<Point> coords_;
    std::vector<Role> role_;
    std::vector<int> group_;
    std::vector<RigidGroup> groups_;
    std::vector<int> free_index_;
    std::vector<char> fixed_component_;
    int num_free_ = 0;
    int reduced_size_ = 0;
    bool finalized_ = false;
    Eigen::SparseMatrix<double> prolongation_;
};

/// Reduced saddle-point system for the stabilized Stokes block
///   [ A      -Bdiv^T ] [u]   [f]
///   [ -Bdiv  -C      ] [p] = [g]
struct ReducedSaddle {
    SparseMatrix A;
    SparseMatrix Bdiv;
    SparseMatrix C;
    Vec f;
    Vec g;
};

struct ReducedSystem {
    SparseMatrix A;
    Vec b;
};

/// Eliminates periodic, Dirichlet and rigid constraints: u = P_u z + lift,
/// p = P_p s. The reduced blocks are P^T (.) P; symmetry is preserved.
ReducedSaddle apply_constraints(const SparseMatrix& A, const SparseMatrix& Bdiv, const SparseMatrix& C,
                                const DofMap& velocity, const DofMap& pressure, const Vec& lift, const Vec& f,
                                const Vec& g);

ReducedSystem apply_constraints(const SparseMatrix& A, const DofMap& dofs, const Vec& lift, const Vec& b);

} // namespace maghom::fem
