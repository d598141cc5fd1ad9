#include "maghom/fem/assembly.hpp"

#include "maghom/fem/q1.hpp"

#include <algorithm>

namespace maghom::fem {

namespace {

Point mesh_h(const PeriodicMesh& mesh) { return {mesh.h(0), mesh.h(1), mesh.h(2)}; }

std::vector<int> element_dofs(const PeriodicMesh& mesh, int e) {
    std::vector<int> dofs(mesh.nodes_per_element());
    for (int a = 0; a < mesh.nodes_per_element(); ++a) dofs[a] = mesh.dof_node(mesh.element_node(e, a));
    return dofs;
}

bool active(const std::vector<char>& mask, int e) { return mask.empty() || mask[e]; }

void scatter(Triplets& trip, const std::vector<int>& rows, int row_comp, const std::vector<int>& cols, int col_comp,
             const Mat& local, double scale) {
    for (int a = 0; a < static_cast<int>(rows.size()); ++a)
        for (int i = 0; i < row_comp; ++i)
            for (int b = 0; b < static_cast<int>(cols.size()); ++b)
                for (int j = 0; j < col_comp; ++j) {
                    const double v = local(a * row_comp + i, b * col_comp + j);
                    if (v != 0.0) trip.emplace_back(rows[a] * row_comp + i, cols[b] * col_comp + j, scale * v);
                }
}

} // namespace

std::vector<char> fluid_mask(const MaterialField& material) {
    std::vector<char> mask(material.phase.size());
    for (std::size_t e = 0; e < mask.size(); ++e) mask[e] = material.phase[e] == Phase::Fluid ? 1 : 0;
    return mask;
}

Point map_to_physical(const PeriodicMesh& mesh, int e, const Point& ref) {
    Point x = mesh.element_origin(e);
    for (int k = 0; k < mesh.dim(); ++k) x[k] += ref[k] * mesh.h(k);
    return x;
}

SparseMatrix assemble_scalar_diffusion(const PeriodicMesh& mesh, const MaterialField& material) {
    const Q1Element el(mesh.dim(), mesh_h(mesh));
    const Mat ke = el.stiffness(Mat::Identity(mesh.dim(), mesh.dim()));
    Triplets trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * ke.size());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = element_dofs(mesh, e);
        scatter(trip, dofs, 1, dofs, 1, ke, material.mu[e]);
    }
    const int n = mesh.num_dof_nodes();
    return SparseMatrix::from_triplets(n, n, trip, true);
}

SparseMatrix assemble_scalar_diffusion(const PeriodicMesh& mesh, const Mat& coefficient) {
    const Q1Element el(mesh.dim(), mesh_h(mesh));
    const Mat ke = el.stiffness(coefficient);
    Triplets trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * ke.size());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = element_dofs(mesh, e);
        scatter(trip, dofs, 1, dofs, 1, ke, 1.0);
    }
    const int n = mesh.num_dof_nodes();
    return SparseMatrix::from_triplets(n, n, trip, true);
}

Vec lumped_mass(const PeriodicMesh& mesh, const std::vector<char>& element_mask) {
    const Q1Element el(mesh.dim(), mesh_h(mesh));
    const Vec le = el.load();
    Vec m = Vec::Zero(mesh.num_dof_nodes());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (!active(element_mask, e)) continue;
        const auto dofs = element_dofs(mesh, e);
        for (int a = 0; a < el.num_nodes(); ++a) m(dofs[a]) += le(a);
    }
    return m;
}

StokesBlocks assemble_stokes(const PeriodicMesh& mesh, const MaterialField& material, double viscosity_scale,
                             const StokesOptions& options) {
    const int d = mesh.dim();
    const Q1Element el(d, mesh_h(mesh));
    const Tensor4 tensor = options.viscosity_tensor ? *options.viscosity_tensor : Tensor4::symmetric_identity(d);
    const Mat ka = el.viscous(tensor);
    const Mat kb = el.divergence();
    const double h = mesh.h_max();
    const Mat kc = el.stiffness(Mat::Identity(d, d)) * (options.stabilization * h * h / (2.0 * viscosity_scale));

    StokesBlocks out;
    out.stabilization_coefficient = options.stabilization * h * h / (2.0 * viscosity_scale);
    out.element_viscosity.assign(mesh.num_elements(), 1.0);
    out.element_block.assign(mesh.num_elements(), -1);
    std::vector<double> levels;
    for (int e = 0; e < mesh.num_elements(); ++e)
        if (!material.is_solid(e)) levels.push_back(options.split_pressure ? material.mu[e] : 0.0);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const int nb = std::max<int>(1, static_cast<int>(levels.size()));
    out.pressure_blocks = nb;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (material.is_solid(e)) continue;
        const double key = options.split_pressure ? material.mu[e] : 0.0;
        out.element_block[e] = static_cast<int>(std::lower_bound(levels.begin(), levels.end(), key) - levels.begin());
    }
    const int np = mesh.num_dof_nodes() * nb;
    out.pressure_node.assign(np, 0);
    out.pressure_weights = Vec::Zero(np);
    const Vec lm = el.load();

    Triplets ta, tb, tc;
    ta.reserve(static_cast<std::size_t>(mesh.num_elements()) * ka.size());
    tb.reserve(static_cast<std::size_t>(mesh.num_elements()) * kb.size());
    tc.reserve(static_cast<std::size_t>(mesh.num_elements()) * kc.size());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = element_dofs(mesh, e);
        const bool solid = material.is_solid(e);
        double visc = 1.0;
        if (solid) visc = options.solid_viscosity_factor;
        out.element_viscosity[e] = visc;
        if (visc != 0.0) scatter(ta, dofs, d, dofs, d, ka, 2.0 * viscosity_scale * visc);
        if (solid) continue;
        std::vector<int> pdofs(dofs.size());
        for (std::size_t a = 0; a < dofs.size(); ++a) {
            pdofs[a] = dofs[a] * nb + out.element_block[e];
            out.pressure_node[pdofs[a]] = 1;
            out.pressure_weights(pdofs[a]) += lm(static_cast<int>(a));
        }
        // kb rows are pressure nodes, columns a*d + j
        for (int a = 0; a < el.num_nodes(); ++a)
            for (int b = 0; b < el.num_nodes(); ++b)
                for (int j = 0; j < d; ++j) {
                    const double v = kb(a, b * d + j);
                    if (v != 0.0) tb.emplace_back(pdofs[a], dofs[b] * d + j, v);
                }
        scatter(tc, pdofs, 1, pdofs, 1, kc, 1.0);
    }
    const int nu = mesh.num_dof_nodes() * d;
    out.A = SparseMatrix::from_triplets(nu, nu, ta, true);
    out.Bdiv = SparseMatrix::from_triplets(np, nu, tb, false);
    out.Cstab = SparseMatrix::from_triplets(np, np, tc, true);
    return out;
}

DofMap pressure_dofmap(const PeriodicMesh& mesh, const StokesBlocks& blocks) {
    const int nb = blocks.pressure_blocks;
    DofMap map(mesh, nb);
    for (int k = 0; k < static_cast<int>(blocks.pressure_node.size()); ++k)
        if (!blocks.pressure_node[k]) map.set_dirichlet(k / nb, k % nb);
    map.finalize();
    return map;
}

ScalarField pressure_field(std::shared_ptr<const PeriodicMesh> mesh, const StokesBlocks& blocks, Vec values) {
    ScalarField p(std::move(mesh), std::move(values));
    p.set_blocks(blocks.element_block, blocks.pressure_blocks);
    return p;
}

Vec stabilization_load(const PeriodicMesh& mesh, const StokesBlocks& blocks, const Vec3& f,
                       const std::vector<char>& element_mask) {
    const int d = mesh.dim();
    const int nb = blocks.pressure_blocks;
    const Q1Element el(d, mesh_h(mesh));
    Vec local = Vec::Zero(el.num_nodes());
    for (int q = 0; q < el.num_qp(); ++q)
        for (int a = 0; a < el.num_nodes(); ++a)
            for (int k = 0; k < d; ++k) local(a) += el.weight(q) * f(k) * el.grad(q, a, k);
    Vec g = Vec::Zero(mesh.num_dof_nodes() * nb);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const int block = blocks.element_block[e];
        if (block < 0 || !active(element_mask, e)) continue;
        const auto dofs = element_dofs(mesh, e);
        for (int a = 0; a < el.num_nodes(); ++a) g(dofs[a] * nb + block) -= blocks.stabilization_coefficient * local(a);
    }
    return g;
}

Vec load_body_force(const PeriodicMesh& mesh, const Vec3& g, const std::vector<char>& element_mask) {
    const int d = mesh.dim();
    const Q1Element el(d, mesh_h(mesh));
    const Vec le = el.load();
    Vec f = Vec::Zero(mesh.num_dof_nodes() * d);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (!active(element_mask, e)) continue;
        const auto dofs = element_dofs(mesh, e);
        for (int a = 0; a < el.num_nodes(); ++a)
            for (int i = 0; i < d; ++i) f(dofs[a] * d + i) += le(a) * g(i);
    }
    return f;
}

Vec load_stress(const PeriodicMesh& mesh, const TensorQuadField& stress, const std::vector<char>& element_mask) {
    const int d = mesh.dim();
    const Q1Element el(d, mesh_h(mesh));
    Vec f = Vec::Zero(mesh.num_dof_nodes() * d);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (!active(element_mask, e)) continue;
        const auto dofs = element_dofs(mesh, e);
        for (int q = 0; q < el.num_qp(); ++q) {
            const Mat3& s = stress.at(e, q);
            for (int a = 0; a < el.num_nodes(); ++a)
                for (int i = 0; i < d; ++i) {
                    // S : D(N_a e_i) = sum_k S_ik dN_a/dx_k for symmetric S
                    double v = 0.0;
                    for (int k = 0; k < d; ++k) v += 0.5 * (s(i, k) + s(k, i)) * el.grad(q, a, k);
                    f(dofs[a] * d + i) += el.weight(q) * v;
                }
        }
    }
    return f;
}

Vec load_flux(const PeriodicMesh& mesh, const VectorQuadField& flux) {
    const int d = mesh.dim();
    const Q1Element el(d, mesh_h(mesh));
    Vec f = Vec::Zero(mesh.num_dof_nodes());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = element_dofs(mesh, e);
        for (int q = 0; q < el.num_qp(); ++q)
            for (int a = 0; a < el.num_nodes(); ++a) {
                double v = 0.0;
                for (int k = 0; k < d; ++k) v += flux.at(e, q)(k) * el.grad(q, a, k);
                f(dofs[a]) += el.weight(q) * v;
            }
    }
    return f;
}

namespace {

/// Applies `body(x, weight, local_node_values)` on each boundary face quadrature
/// point; local values are the face-restricted shape functions of the element.
template <class Fn>
void for_each_face_point(const PeriodicMesh& mesh, Fn&& body) {
    const int d = mesh.dim();
    std::vector<double> nodes, weights;
    gauss_rule(2, nodes, weights);
    const auto faces = mesh.boundary_faces();
    const int tangential = d - 1;
    const int npts = tangential == 1 ? 2 : 4;
    for (const auto& face : faces) {
        double area = 1.0;
        for (int k = 0; k < d; ++k)
            if (k != face.axis) area *= mesh.h(k);
        for (int p = 0; p < npts; ++p) {
            Point ref{0.0, 0.0, 0.0};
            double w = area;
            int rem = p;
            for (int k = 0; k < d; ++k) {
                if (k == face.axis) {
                    ref[k] = face.side == 0 ? 0.0 : 1.0;
                    continue;
                }
                const int idx = rem % 2;
                rem /= 2;
                ref[k] = nodes[idx];
                w *= weights[idx];
            }
            body(face, ref, w);
        }
    }
}

} // namespace

Vec load_neumann(const PeriodicMesh& mesh, const std::function<Vec3(const Point&)>& k) {
    Vec f = Vec::Zero(mesh.num_dof_nodes());
    for_each_face_point(mesh, [&](const PeriodicMesh::BoundaryFace& face, const Point& ref, double w) {
        const Point x = map_to_physical(mesh, face.element, ref);
        const Vec3 kv = k(x);
        double kn = 0.0;
        for (int c = 0; c < mesh.dim(); ++c) kn += kv(c) * face.normal[c];
        for (int a = 0; a < mesh.nodes_per_element(); ++a) {
            const double s = Q1Element::shape_at(mesh.dim(), ref, a);
            if (s != 0.0) f(mesh.dof_node(mesh.element_node(face.element, a))) += w * kn * s;
        }
    });
    return f;
}

double boundary_flux(const PeriodicMesh& mesh, const std::function<Vec3(const Point&)>& k) {
    double total = 0.0;
    for_each_face_point(mesh, [&](const PeriodicMesh::BoundaryFace& face, const Point& ref, double w) {
        const Vec3 kv = k(map_to_physical(mesh, face.element, ref));
        for (int c = 0; c < mesh.dim(); ++c) total += w * kv(c) * face.normal[c];
    });
    return total;
}

} // namespace maghom::fem
