#include "maghom/fem/dofmap.hpp"

#include "maghom/error.hpp"

#include <stdexcept>

namespace maghom::fem {

DofMap::DofMap(const PeriodicMesh& mesh, int components)
    : dim_(mesh.dim()), components_(components) {
    const int nd = mesh.num_dof_nodes();
    coords_.resize(nd);
    for (int k = 0; k < nd; ++k) coords_[k] = mesh.node_coords(mesh.node_of_dof(k));
    role_.assign(nd, Role::Free);
    group_.assign(nd, -1);
}

void DofMap::require_open() const {
    if (finalized_) throw std::logic_error("DofMap already finalized");
}

void DofMap::require_finalized() const {
    if (!finalized_) throw std::logic_error("DofMap not finalized");
}

void DofMap::set_dirichlet(int dof_node) {
    require_open();
    if (role_[dof_node] == Role::Rigid)
        throw InconsistentConstraints("node " + std::to_string(dof_node) + " is both Dirichlet and rigid");
    role_[dof_node] = Role::Dirichlet;
}

void DofMap::set_dirichlet(int dof_node, int comp) {
    require_open();
    if (role_[dof_node] == Role::Rigid)
        throw InconsistentConstraints("node " + std::to_string(dof_node) + " is both Dirichlet and rigid");
    if (fixed_component_.empty()) fixed_component_.assign(role_.size() * components_, 0);
    fixed_component_[dof_node * components_ + comp] = 1;
}

void DofMap::set_dirichlet_boundary(const PeriodicMesh& mesh) {
    for (int node = 0; node < mesh.num_nodes(); ++node)
        if (mesh.on_boundary(node)) set_dirichlet(mesh.dof_node(node));
}

int DofMap::add_rigid_group(const std::vector<int>& dof_nodes, const Point& center) {
    require_open();
    if (components_ != dim_) throw std::logic_error("rigid groups require a vector field");
    const int g = static_cast<int>(groups_.size());
    for (int node : dof_nodes) {
        if (role_[node] == Role::Dirichlet)
            throw InconsistentConstraints("node " + std::to_string(node) + " is both Dirichlet and rigid");
        if (role_[node] == Role::Rigid && group_[node] != g)
            throw InconsistentConstraints("node " + std::to_string(node) + " belongs to two rigid groups");
        role_[node] = Role::Rigid;
        group_[node] = g;
    }
    groups_.push_back({dof_nodes, center, 0});
    return g;
}

void DofMap::finalize() {
    require_open();
    const int nd = static_cast<int>(role_.size());
    free_index_.assign(nd * components_, -1);
    int next = 0;
    for (int node = 0; node < nd; ++node) {
        if (role_[node] != Role::Free) continue;
        for (int c = 0; c < components_; ++c)
            if (fixed_component_.empty() || !fixed_component_[node * components_ + c])
                free_index_[node * components_ + c] = next++;
    }
    num_free_ = next;
    for (auto& g : groups_) {
        g.offset = next;
        next += rigid_dofs_per_group();
    }
    reduced_size_ = next;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(full_size() + 4 * groups_.size());
    for (int node = 0; node < nd; ++node) {
        const int row0 = node * components_;
        switch (role_[node]) {
        case Role::Free:
            for (int c = 0; c < components_; ++c)
                if (free_index_[row0 + c] >= 0) trip.emplace_back(row0 + c, free_index_[row0 + c], 1.0);
            break;
        case Role::Dirichlet: break;
        case Role::Rigid: {
            const auto& g = groups_[group_[node]];
            double r[3] = {0.0, 0.0, 0.0};
            for (int k = 0; k < dim_; ++k) r[k] = coords_[node][k] - g.center[k];
            for (int c = 0; c < dim_; ++c) trip.emplace_back(row0 + c, g.offset + c, 1.0);
            const int rot = g.offset + dim_;
            if (dim_ == 2) {
                // R e_3 x r = R (-r_2, r_1)
                trip.emplace_back(row0 + 0, rot, -r[1]);
                trip.emplace_back(row0 + 1, rot, r[0]);
            } else {
                // (R x r) = (R2 r3 - R3 r2, R3 r1 - R1 r3, R1 r2 - R2 r1)
                trip.emplace_back(row0 + 0, rot + 1, r[2]);
                trip.emplace_back(row0 + 0, rot + 2, -r[1]);
                trip.emplace_back(row0 + 1, rot + 2, r[0]);
                trip.emplace_back(row0 + 1, rot + 0, -r[2]);
                trip.emplace_back(row0 + 2, rot + 0, r[1]);
                trip.emplace_back(row0 + 2, rot + 1, -r[0]);
            }
            break;
        }
        }
    }
    prolongation_.resize(full_size(), reduced_size_);
    prolongation_.setFromTriplets(trip.begin(), trip.end());
    prolongation_.makeCompressed();
    finalized_ = true;
}

int DofMap::num_dirichlet_nodes() const noexcept {
    int count = 0;
    for (Role r : role_)
        if (r == Role::Dirichlet) ++count;
    return count;
}

const Eigen::SparseMatrix<double>& DofMap::prolongation() const {
    require_finalized();
    return prolongation_;
}

std::vector<Vec> DofMap::kernel() const {
    require_finalized();
    std::vector<Vec> modes;
    if (num_dirichlet_nodes() > 0) return modes;
    for (int c = 0; c < components_; ++c) {
        Vec k = Vec::Zero(reduced_size_);
        for (int node = 0; node < static_cast<int>(role_.size()); ++node)
            if (role_[node] == Role::Free && free_index_[node * components_ + c] >= 0)
                k(free_index_[node * components_ + c]) = 1.0;
        for (const auto& g : groups_) k(g.offset + c) = 1.0;
        modes.push_back(std::move(k));
    }
    return modes;
}

Vec DofMap::rigid_translation(int group, const Vec& reduced) const {
    return reduced.segment(groups_[group].offset, dim_);
}

Vec DofMap::rigid_rotation(int group, const Vec& reduced) const {
    return reduced.segment(groups_[group].offset + dim_, rotations());
}

ReducedSaddle apply_constraints(const SparseMatrix& A, const SparseMatrix& Bdiv, const SparseMatrix& C,
                                const DofMap& velocity, const DofMap& pressure, const Vec& lift, const Vec& f,
                                const Vec& g) {
    const auto& Pu = velocity.prolongation();
    const auto& Pp = pressure.prolongation();
    const Eigen::SparseMatrix<double> Ac = A.csr();
    const Eigen::SparseMatrix<double> Bc = Bdiv.csr();
    const Eigen::SparseMatrix<double> Cc = C.csr();

    Csr Ar = Csr(Pu.transpose() * Ac * Pu);
    Csr Br = Csr(Pp.transpose() * Bc * Pu);
    Csr Cr = Csr(Pp.transpose() * Cc * Pp);
    // exact symmetry of the Galerkin products
    Ar = Csr(0.5 * (Ar + Csr(Ar.transpose())));
    Cr = Csr(0.5 * (Cr + Csr(Cr.transpose())));

    ReducedSaddle out{SparseMatrix(std::move(Ar), true), SparseMatrix(std::move(Br), false),
                      SparseMatrix(std::move(Cr), true), Vec(), Vec()};
    out.f = Pu.transpose() * (f - A.csr() * lift);
    out.g = Pp.transpose() * (g + Bdiv.csr() * lift);
    return out;
}

ReducedSystem apply_constraints(const SparseMatrix& A, const DofMap& dofs, const Vec& lift, const Vec& b) {
    const auto& P = dofs.prolongation();
    const Eigen::SparseMatrix<double> Ac = A.csr();
    Csr Ar = Csr(P.transpose() * Ac * P);
    Ar = Csr(0.5 * (Ar + Csr(Ar.transpose())));
    return {SparseMatrix(std::move(Ar), true), P.transpose() * (b - A.csr() * lift)};
}

} // namespace maghom::fem
