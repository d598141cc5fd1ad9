#include "maghom/dns.hpp"

#include "maghom/error.hpp"
#include "maghom/fem/q1.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace maghom::dns {

using fem::Q1Element;

namespace {

Point mesh_h(const PeriodicMesh& mesh) { return {mesh.h(0), mesh.h(1), mesh.h(2)}; }

double frob2(const Mat3& a) { return a.squaredNorm(); }

} // namespace

std::shared_ptr<const PeriodicMesh> build_dns_mesh(int dim, const Point& lengths, int cells_per_unit,
                                                   int elements_per_cell) {
    if (elements_per_cell < 8)
        throw UnderResolved("DNS needs at least 8 elements per cell axis, got " + std::to_string(elements_per_cell));
    if (cells_per_unit < 1) throw InvalidGeometry("cells per unit length must be positive");
    for (int k = 1; k < dim; ++k)
        if (lengths[k] != lengths[0]) throw InvalidGeometry("DNS requires a cubic box");
    const double cells = lengths[0] * cells_per_unit;
    if (std::abs(cells - std::round(cells)) > 1e-12)
        throw InvalidGeometry("domain length is not a whole number of cells");
    const int n = static_cast<int>(std::round(cells)) * elements_per_cell;
    return std::make_shared<const PeriodicMesh>(build_box_mesh(dim, lengths, n));
}

ScalarField solve_dns_potential(std::shared_ptr<const PeriodicMesh> mesh, const MaterialField& material,
                                const macro::FluxSpec& k, double tol, fem::SolveStats* stats) {
    macro::check_flux(*mesh, k);
    const fem::SparseMatrix A = fem::assemble_scalar_diffusion(*mesh, material);
    return macro::solve_neumann_potential(std::move(mesh), A, k, tol, stats);
}

Mat3 maxwell_stress_at(const Vec3& g, double mu, double S, int dim) {
    Mat3 eye = Mat3::Zero();
    for (int k = 0; k < dim; ++k) eye(k, k) = 1.0;
    return S * mu * (g * g.transpose() - 0.5 * g.squaredNorm() * eye);
}

TensorQuadField maxwell_stress(const ScalarField& phi, const MaterialField& material, double S, int gauss_per_axis) {
    const PeriodicMesh& m = phi.mesh();
    const Q1Element el(m.dim(), mesh_h(m), gauss_per_axis);
    TensorQuadField out(m.num_elements(), el.num_qp(), Mat3::Zero());
    for (int e = 0; e < m.num_elements(); ++e)
        for (int q = 0; q < el.num_qp(); ++q)
            out.at(e, q) = maxwell_stress_at(phi.gradient(e, el.qp(q)), material.mu[e], S, m.dim());
    return out;
}

void solve_dns_flow(DnsState& state, const DnsConfig& config) {
    const PeriodicMesh& m = *state.mesh;
    const int d = m.dim();
    const MaterialField& mat = state.material;
    const auto& fc = config.flow;

    const fem::StokesBlocks blocks = fem::assemble_stokes(m, mat, 1.0 / fc.Re);
    fem::DofMap velocity(m, d);
    velocity.set_dirichlet_boundary(m);
    state.center.assign(mat.num_particles, Point{0.0, 0.0, 0.0});
    {
        std::vector<std::vector<int>> nodes(mat.num_particles);
        std::vector<int> count(mat.num_particles, 0);
        std::vector<int> owner(m.num_dof_nodes(), -1);
        for (int e = 0; e < m.num_elements(); ++e) {
            const int p = mat.particle[e];
            if (p < 0) continue;
            for (int a = 0; a < m.nodes_per_element(); ++a) {
                const int node = m.dof_node(m.element_node(e, a));
                if (owner[node] < 0) {
                    owner[node] = p;
                    nodes[p].push_back(node);
                }
            }
            const Point c = m.element_centroid(e);
            for (int k = 0; k < 3; ++k) state.center[p][k] += c[k];
            ++count[p];
        }
        for (int p = 0; p < mat.num_particles; ++p) {
            for (int k = 0; k < 3; ++k) state.center[p][k] /= count[p];
            std::sort(nodes[p].begin(), nodes[p].end());
            velocity.add_rigid_group(nodes[p], state.center[p]);
        }
    }
    velocity.finalize();

    const std::vector<char> fluid = fem::fluid_mask(mat);
    const TensorQuadField T = maxwell_stress(state.phi, mat, fc.S);
    const Vec3 body = fc.g / (fc.Fr * fc.Fr);
    const Vec f = fem::load_body_force(m, body, fluid) - fem::load_stress(m, T, fluid);
    const Vec g = fem::stabilization_load(m, blocks, body, fluid);
    const fem::StokesSolution sol = fem::solve_constrained_stokes(m, blocks, velocity, f, fc.tol, fc.method, g);

    state.u = VectorField(state.mesh, sol.u);
    state.p = fem::pressure_field(state.mesh, blocks, sol.p);
    std::vector<char> solid(mat.phase.size());
    for (std::size_t e = 0; e < solid.size(); ++e) solid[e] = mat.is_solid(static_cast<int>(e)) ? 1 : 0;
    state.p.set_zero_elements(std::move(solid));
    state.flow_stats = sol.stats;
    state.energy_a = sol.a_uu;
    state.energy_c = sol.c_pp;
    state.energy_pressure_load = sol.pressure_load;
    state.energy_load = sol.load;
    state.energy_defect = sol.energy_defect();

    state.translation.clear();
    state.rotation.clear();
    state.rigid_defect = 0.0;
    for (int g = 0; g < mat.num_particles; ++g) {
        const Vec U = velocity.rigid_translation(g, sol.reduced_u);
        const Vec R = velocity.rigid_rotation(g, sol.reduced_u);
        state.translation.push_back(U);
        state.rotation.push_back(R);
        for (int node : velocity.groups()[g].nodes) {
            const Point x = m.node_coords(m.node_of_dof(node));
            Vec3 r(x[0] - state.center[g][0], x[1] - state.center[g][1], x[2] - state.center[g][2]);
            Vec3 expected = Vec3::Zero();
            for (int k = 0; k < d; ++k) expected(k) = U(k);
            if (d == 2) {
                expected(0) -= R(0) * r(1);
                expected(1) += R(0) * r(0);
            } else {
                expected += Vec3(R(0), R(1), R(2)).cross(r);
            }
            for (int k = 0; k < d; ++k)
                state.rigid_defect = std::max(state.rigid_defect, std::abs(sol.u(node * d + k) - expected(k)));
        }
    }
}

DnsState solve_dns(int dim, int cells_per_unit, const DnsConfig& config) {
    DnsState state;
    state.cells_per_unit = cells_per_unit;
    state.eps = 1.0 / cells_per_unit;
    state.mesh = build_dns_mesh(dim, config.flow.lengths, cells_per_unit, config.elements_per_cell);
    state.material = tile_material(*state.mesh, config.geometry, cells_per_unit);
    state.phi = solve_dns_potential(state.mesh, state.material, config.flow.k, config.flow.tol, &state.potential_stats);
    solve_dns_flow(state, config);
    return state;
}

double basket_function(int index, const Point& x) {
    constexpr double pi = std::numbers::pi;
    switch (index) {
    case 0: return x[0] - 0.5;
    case 1: return x[1] - 0.5;
    case 2: return std::sin(pi * x[0]) * std::sin(pi * x[1]);
    case 3: return std::cos(pi * x[0]) * std::cos(pi * x[1]);
    default: return std::cos(2.0 * pi * x[0]) + std::sin(pi * x[1]);
    }
}

CorrectorEntry corrector_norms(const DnsState& dns, const macro::ReconstructedFields& fields) {
    const PeriodicMesh& m = *dns.mesh;
    const int d = m.dim();
    const Q1Element el(d, mesh_h(m), 3);

    CorrectorEntry out;
    out.eps = dns.eps;
    out.cells_per_unit = dns.cells_per_unit;
    out.resolution = m.resolution();
    double pot = 0.0, pot_ab = 0.0, vel = 0.0, vel_ab = 0.0, t1 = 0.0, t2 = 0.0;
    double gphi = 0.0, uh1 = 0.0, pl2 = 0.0, solid_p = 0.0;
    std::array<double, kBasketSize> weak{};
    for (int e = 0; e < m.num_elements(); ++e) {
        const bool solid = dns.material.is_solid(e);
        for (int q = 0; q < el.num_qp(); ++q) {
            const Point& ref = el.qp(q);
            const Point x = fem::map_to_physical(m, e, ref);
            const double w = el.weight(q);
            const auto s = fields.at(x);

            const Vec3 g = dns.phi.gradient(e, ref);
            pot += w * (g - s.grad_phi0 - s.grad_y_phi1).squaredNorm();
            pot_ab += w * (g - s.grad_phi0).squaredNorm();
            gphi += w * g.squaredNorm();

            const Mat3 D = dns.u.strain(e, ref);
            vel += w * frob2(D - s.strain0_full - s.strain_y_u1);
            vel_ab += w * frob2(D - s.strain0_full);

            const Mat3 T = maxwell_stress_at(g, dns.material.mu[e], fields.S(), d);
            const double gap = (T - s.T0).norm();
            t1 += w * gap;
            t2 += w * gap * gap;

            const double p = dns.p.value(e, ref);
            if (solid) solid_p = std::max(solid_p, std::abs(p));
            for (int k = 0; k < kBasketSize; ++k) weak[k] += w * (p - s.pi0) * basket_function(k, x);
            uh1 += w * (dns.u.value(e, ref).squaredNorm() + dns.u.gradient(e, ref).squaredNorm());
            pl2 += w * p * p;
        }
    }
    out.potential = std::sqrt(pot);
    out.potential_ablation = std::sqrt(pot_ab);
    out.velocity = std::sqrt(vel);
    out.velocity_ablation = std::sqrt(vel_ab);
    out.stress_gap_l1 = t1;
    out.stress_gap_l2 = std::sqrt(t2);
    out.weak_pressure = weak;
    out.grad_phi_l2 = std::sqrt(gphi);
    out.velocity_h1 = std::sqrt(uh1);
    out.pressure_l2 = std::sqrt(pl2);
    out.energy_defect = dns.energy_defect;
    out.rigid_defect = dns.rigid_defect;
    out.solid_pressure_max = solid_p;
    out.potential_iterations = dns.potential_stats.iterations;
    out.flow_iterations = dns.flow_stats.iterations;
    return out;
}

CorrectorReport corrector_study(const std::vector<int>& cells_per_unit, const DnsConfig& config,
                                std::shared_ptr<const cell::CellSolutionSet> cells,
                                std::shared_ptr<const macro::MacroState> macro) {
    CorrectorReport report;
    report.macro_energy_defect = macro->energy_defect;
    report.tol = config.flow.tol;
    const int dim = macro->mesh->dim();
    for (int m : cells_per_unit) {
        const DnsState dns = solve_dns(dim, m, config);
        const macro::ReconstructedFields fields(macro, cells, dns.eps);
        report.entries.push_back(corrector_norms(dns, fields));
    }
    return report;
}

} // namespace maghom::dns
