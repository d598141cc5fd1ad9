#include "maghom/cell.hpp"

#include "maghom/error.hpp"
#include "maghom/fem/q1.hpp"

#include <cmath>

namespace maghom::cell {

using fem::Q1Element;

namespace {

Point mesh_h(const PeriodicMesh& mesh) { return {mesh.h(0), mesh.h(1), mesh.h(2)}; }

int pair_index(int dim, int i, int j) { return i * dim + j; }

double frobenius(const Mat3& a, const Mat3& b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += a(i, j) * b(i, j);
    return s;
}

/// Removes the cell mean of every component of a periodic nodal field
/// (uniform periodic Q1 meshes integrate nodal values with equal weights).
void remove_component_means(Vec& u, int comps) {
    const int nodes = static_cast<int>(u.size()) / comps;
    for (int c = 0; c < comps; ++c) {
        double mean = 0.0;
        for (int k = 0; k < nodes; ++k) mean += u(k * comps + c);
        mean /= nodes;
        for (int k = 0; k < nodes; ++k) u(k * comps + c) -= mean;
    }
}

void remove_weighted_mean(Vec& p, const Vec& weights, const std::vector<char>& active) {
    const double total = weights.sum();
    if (total <= 0.0) return;
    const double mean = weights.dot(p) / total;
    for (int k = 0; k < p.size(); ++k)
        if (active[k]) p(k) -= mean;
}

std::vector<char> solid_mask(const MaterialField& material) {
    std::vector<char> mask(material.phase.size());
    for (std::size_t e = 0; e < mask.size(); ++e) mask[e] = material.phase[e] == Phase::Solid ? 1 : 0;
    return mask;
}

} // namespace

std::string to_string(RigidMode mode) { return mode == RigidMode::Elimination ? "elimination" : "penalty"; }

RigidMode rigid_mode_from_string(const std::string& name) {
    if (name == "elimination") return RigidMode::Elimination;
    if (name == "penalty") return RigidMode::Penalty;
    throw ValidationError("unknown rigid mode '" + name + "' (expected elimination or penalty)");
}

ScalarCellSolution solve_scalar_cell(std::shared_ptr<const PeriodicMesh> mesh, const MaterialField& material, int i,
                                     const CellOptions& options) {
    const PeriodicMesh& m = *mesh;
    const Q1Element el(m.dim(), mesh_h(m));
    const fem::SparseMatrix A = fem::assemble_scalar_diffusion(m, material);

    // right-hand side -int mu e^i . grad v
    fem::VectorQuadField flux(m.num_elements(), el.num_qp(), fem::Vec3::Zero());
    for (int e = 0; e < m.num_elements(); ++e)
        for (int q = 0; q < el.num_qp(); ++q) flux.at(e, q)(i) = -material.mu[e];
    const Vec b = fem::load_flux(m, flux);

    fem::SpdOptions so;
    so.kernel.push_back(Vec::Ones(m.num_dof_nodes()));
    ScalarCellSolution out;
    out.i = i;
    Vec omega = fem::solve_spd(A, b, options.tol, so, &out.stats);
    omega.array() -= omega.mean();
    out.omega = ScalarField(std::move(mesh), std::move(omega));
    return out;
}

MuEffResult compute_mu_eff(const std::vector<ScalarCellSolution>& solutions, const MaterialField& material) {
    const PeriodicMesh& m = solutions.front().omega.mesh();
    const int d = m.dim();
    const Q1Element el(d, mesh_h(m));
    MuEffResult out;
    out.value = Mat::Zero(d, d);
    out.linear_form = Mat::Zero(d, d);
    std::vector<fem::Vec3> g(d);
    for (int e = 0; e < m.num_elements(); ++e) {
        const double mu = material.mu[e];
        for (int q = 0; q < el.num_qp(); ++q) {
            const double w = el.weight(q) * mu;
            for (int k = 0; k < d; ++k) g[k] = solutions[k].omega.gradient(e, el.qp(q));
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    fem::Vec3 mi = g[i], mj = g[j];
                    mi(i) += 1.0;
                    mj(j) += 1.0;
                    out.value(i, j) += w * mi.dot(mj);
                    out.linear_form(i, j) += w * ((i == j ? 1.0 : 0.0) + g[j](i));
                }
        }
    }
    const double vol = m.domain_volume();
    out.value /= vol;
    out.linear_form /= vol;
    out.formula_gap = (out.value - out.linear_form).cwiseAbs().maxCoeff();
    if (out.formula_gap > 1e-6)
        throw FormulaMismatch("effective permeability forms disagree by " + std::to_string(out.formula_gap));
    return out;
}

Mat3 basis_strain(int dim, int i, int j) {
    Mat3 s = Mat3::Zero();
    s(i, j) += 0.5;
    s(j, i) += 0.5;
    if (i == j)
        for (int k = 0; k < dim; ++k) s(k, k) -= 1.0 / dim;
    return s;
}

CellStokesSystem::CellStokesSystem(std::shared_ptr<const PeriodicMesh> mesh, const MaterialField& material,
                                   const CellOptions& options)
    : mesh_(std::move(mesh)), material_(material), options_(options) {
    const PeriodicMesh& m = *mesh_;
    const int d = m.dim();
    const bool penalty = options.rigid_mode == RigidMode::Penalty;

    fem::StokesOptions so;
    so.solid_viscosity_factor = penalty ? options.penalty_factor : 0.0;
    blocks_ = fem::assemble_stokes(m, material_, 0.5, so);

    vdofs_ = std::make_unique<fem::DofMap>(m, d);
    if (!penalty && material_.has_solid()) {
        std::vector<std::vector<char>> member(material_.num_particles, std::vector<char>(m.num_dof_nodes(), 0));
        std::vector<Point> center(material_.num_particles, Point{0.0, 0.0, 0.0});
        std::vector<int> count(material_.num_particles, 0);
        for (int e = 0; e < m.num_elements(); ++e) {
            const int p = material_.particle[e];
            if (p < 0) continue;
            for (int a = 0; a < m.nodes_per_element(); ++a) member[p][m.dof_node(m.element_node(e, a))] = 1;
            const Point c = m.element_centroid(e);
            for (int k = 0; k < 3; ++k) center[p][k] += c[k];
            ++count[p];
        }
        for (int p = 0; p < material_.num_particles; ++p) {
            std::vector<int> nodes;
            for (int k = 0; k < m.num_dof_nodes(); ++k)
                if (member[p][k]) nodes.push_back(k);
            for (int k = 0; k < 3; ++k) center[p][k] /= count[p];
            vdofs_->add_rigid_group(nodes, center[p]);
        }
    }
    vdofs_->finalize();

    pdofs_ = std::make_unique<fem::DofMap>(fem::pressure_dofmap(m, blocks_));

    const Vec zero_u = Vec::Zero(vdofs_->full_size());
    const Vec zero_p = Vec::Zero(pdofs_->full_size());
    reduced_ = fem::apply_constraints(blocks_.A, blocks_.Bdiv, blocks_.Cstab, *vdofs_, *pdofs_, zero_u, zero_u,
                                      zero_p);
}

CellStokesSystem::Solution CellStokesSystem::solve(const Vec& f, const Vec& lift) const {
    const auto& Pu = vdofs_->prolongation();
    const auto& Pp = pdofs_->prolongation();
    const Vec fr = Pu.transpose() * (f - blocks_.A.csr() * lift);
    const Vec gr = Pp.transpose() * (blocks_.Bdiv.csr() * lift);

    fem::SaddleOptions so;
    so.method = options_.method;
    so.velocity_kernel = vdofs_->kernel();
    // constant pressure is annihilated by b(., v) only when the particle moves rigidly
    const bool constant_pressure_kernel =
        options_.rigid_mode == RigidMode::Elimination || !material_.has_solid();
    if (constant_pressure_kernel) so.pressure_kernel.push_back(Vec::Ones(pdofs_->reduced_size()));
    fem::SaddleSolution s = fem::solve_saddle(reduced_.A, reduced_.Bdiv, reduced_.C, fr, gr, options_.tol, so);

    Solution out;
    out.reduced_u = s.u;
    out.u = Pu * s.u + lift;
    remove_component_means(out.u, mesh_->dim());
    out.p = Pp * s.p;
    if (constant_pressure_kernel) remove_weighted_mean(out.p, blocks_.pressure_weights, blocks_.pressure_node);
    out.stats = s.stats;
    return out;
}

ViscousCellSolution solve_viscous_cell(const CellStokesSystem& system, int i, int j) {
    const PeriodicMesh& m = system.mesh();
    const int d = m.dim();
    const Q1Element el(d, mesh_h(m));
    const Mat3 strain = basis_strain(d, i, j);

    fem::TensorQuadField stress(m.num_elements(), el.num_qp(), Mat3::Zero());
    for (int e = 0; e < m.num_elements(); ++e)
        for (int q = 0; q < el.num_qp(); ++q) stress.at(e, q) = system.blocks().element_viscosity[e] * strain;

    ViscousCellSolution out;
    out.i = i;
    out.j = j;
    out.basis_load = fem::load_stress(m, stress);
    out.lift = Vec::Zero(system.velocity_dofs().full_size());
    const auto& vd = system.velocity_dofs();
    for (int k = 0; k < m.num_dof_nodes(); ++k) {
        if (vd.role(k) != fem::Role::Rigid) continue;
        const Point y = m.node_coords(m.node_of_dof(k));
        // P^ij(y) = y_j e_i - delta_ij y / d
        out.lift(k * d + i) += y[j];
        if (i == j)
            for (int c = 0; c < d; ++c) out.lift(k * d + c) -= y[c] / d;
    }
    auto sol = system.solve(out.basis_load, out.lift);
    out.chi = VectorField(system.mesh_ptr(), std::move(sol.u));
    // stored with the stress convention D(w) - q I
    out.q = fem::pressure_field(system.mesh_ptr(), system.blocks(), -sol.p);
    if (system.options().rigid_mode == RigidMode::Elimination) out.q.set_zero_elements(solid_mask(system.material()));
    out.rigid_dofs = sol.reduced_u.tail(sol.reduced_u.size() - vd.num_free_dofs());
    out.stats = sol.stats;
    return out;
}

std::vector<TensorQuadField> compute_tau(const PeriodicMesh& mesh, const MaterialField& material,
                                         const std::vector<ScalarCellSolution>& scalar) {
    const int d = mesh.dim();
    const Q1Element el(d, mesh_h(mesh));
    std::vector<TensorQuadField> tau(d * d, TensorQuadField(mesh.num_elements(), el.num_qp(), Mat3::Zero()));
    Mat3 eye = Mat3::Zero();
    for (int k = 0; k < d; ++k) eye(k, k) = 1.0;
    std::vector<fem::Vec3> m(d);
    for (int e = 0; e < mesh.num_elements(); ++e)
        for (int q = 0; q < el.num_qp(); ++q) {
            for (int k = 0; k < d; ++k) {
                m[k] = scalar[k].omega.gradient(e, el.qp(q));
                m[k](k) += 1.0;
            }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    tau[pair_index(d, i, j)].at(e, q) =
                        material.mu[e] * (m[i] * m[j].transpose() - 0.5 * m[i].dot(m[j]) * eye);
        }
    return tau;
}

MagneticCellSolution solve_magnetic_cell(const CellStokesSystem& system, const TensorQuadField& tau, int i, int j) {
    const PeriodicMesh& m = system.mesh();
    const Vec f = -fem::load_stress(m, tau, fem::fluid_mask(system.material()));
    auto sol = system.solve(f, Vec::Zero(system.velocity_dofs().full_size()));
    MagneticCellSolution out;
    out.i = i;
    out.j = j;
    out.xi = VectorField(system.mesh_ptr(), std::move(sol.u));
    // stored with the stress convention D(xi) + r I + tau
    out.r = fem::pressure_field(system.mesh_ptr(), system.blocks(), -sol.p);
    if (system.options().rigid_mode == RigidMode::Elimination) out.r.set_zero_elements(solid_mask(system.material()));
    out.stats = sol.stats;
    return out;
}

namespace {

void add_isotropic(Tensor4& t, int d) {
    for (int i = 0; i < d; ++i)
        for (int m = 0; m < d; ++m) t(i, i, m, m) += 1.0 / d;
}

} // namespace

NResult compute_N(const CellStokesSystem& system, const std::vector<ViscousCellSolution>& solutions) {
    const PeriodicMesh& m = system.mesh();
    const int d = m.dim();
    const Q1Element el(d, mesh_h(m));
    const auto& visc = system.blocks().element_viscosity;
    const auto& A = system.blocks().A.csr();
    const auto& B = system.blocks().Bdiv.csr();
    const auto& C = system.blocks().Cstab.csr();
    const int np = d * d;

    std::vector<Mat3> basis(np);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) basis[pair_index(d, i, j)] = basis_strain(d, i, j);

    // weighted strain averages and pairwise energies of w = P - chi
    std::vector<Mat3> strain_integral(np, Mat3::Zero());
    Mat energy = Mat::Zero(np, np);
    std::vector<Mat3> w(np);
    for (int e = 0; e < m.num_elements(); ++e) {
        if (visc[e] == 0.0) continue;
        for (int q = 0; q < el.num_qp(); ++q) {
            for (int a = 0; a < np; ++a) w[a] = basis[a] - solutions[a].chi.strain(e, el.qp(q));
            const double wt = el.weight(q) * visc[e];
            for (int a = 0; a < np; ++a) {
                strain_integral[a] += wt * w[a];
                for (int b = a; b < np; ++b) energy(a, b) += wt * frobenius(w[a], w[b], d);
            }
        }
    }
    for (int a = 0; a < np; ++a)
        for (int b = 0; b < a; ++b) energy(a, b) = energy(b, a);

    Mat strain_avg(np, np), direct(np, np);
    for (int a = 0; a < np; ++a) {
        const Vec& chi_a = solutions[a].chi.values();
        const Vec& q_a = solutions[a].q.values();
        const Vec a_chi = A * chi_a;
        const Vec bq = B.transpose() * q_a;
        const Vec cq = C * q_a;
        for (int b = 0; b < np; ++b) {
            const Vec& lift_b = solutions[b].lift;
            strain_avg(a, b) = frobenius(basis[b], strain_integral[a], d);
            const double a_wl = solutions[a].basis_load.dot(lift_b) - a_chi.dot(lift_b);
            const double b_ql = bq.dot(lift_b);
            const double c_qq = cq.dot(solutions[b].q.values());
            direct(a, b) = strain_avg(a, b) - a_wl + b_ql - c_qq;
        }
    }

    const double vol = m.domain_volume();
    NResult out;
    out.energy = Tensor4(d);
    out.direct = Tensor4(d);
    out.strain_average = Tensor4(d);
    out.value = Tensor4(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int mm = 0; mm < d; ++mm)
                for (int n = 0; n < d; ++n) {
                    const int a = pair_index(d, i, j), b = pair_index(d, mm, n);
                    out.energy(i, j, mm, n) = energy(a, b) / vol;
                    out.direct(i, j, mm, n) = direct(a, b) / vol;
                    out.strain_average(i, j, mm, n) = strain_avg(a, b) / vol;
                }
    add_isotropic(out.energy, d);
    add_isotropic(out.direct, d);
    add_isotropic(out.strain_average, d);

    out.formula_gap = out.energy.max_abs_difference(out.direct);
    double asym = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int mm = 0; mm < d; ++mm)
                for (int n = 0; n < d; ++n) {
                    const double v = out.direct(i, j, mm, n);
                    asym = std::max({asym, std::abs(v - out.direct(mm, n, i, j)), std::abs(v - out.direct(j, i, mm, n)),
                                     std::abs(v - out.direct(i, j, n, mm))});
                    out.value(i, j, mm, n) = 0.125 * (out.energy(i, j, mm, n) + out.energy(j, i, mm, n) +
                                                      out.energy(i, j, n, mm) + out.energy(j, i, n, mm) +
                                                      out.energy(mm, n, i, j) + out.energy(n, mm, i, j) +
                                                      out.energy(mm, n, j, i) + out.energy(n, mm, j, i));
                }
    out.asymmetry = asym;
    // the penalty stress average carries a round-off of order penalty * eps
    if (system.options().rigid_mode == RigidMode::Elimination && out.formula_gap > 1e-6)
        throw FormulaMismatch("effective viscosity forms disagree by " + std::to_string(out.formula_gap));
    return out;
}

BResult compute_B(const PeriodicMesh& mesh, const std::vector<MagneticCellSolution>& magnetic,
                  const std::vector<TensorQuadField>& tau) {
    const int d = mesh.dim();
    const Q1Element el(d, mesh_h(mesh));
    const int np = d * d;
    BResult out;
    out.raw.assign(np, Mat::Zero(d, d));
    for (int a = 0; a < np; ++a) {
        Mat3 acc = Mat3::Zero();
        for (int e = 0; e < mesh.num_elements(); ++e)
            for (int q = 0; q < el.num_qp(); ++q)
                acc += el.weight(q) * (magnetic[a].xi.strain(e, el.qp(q)) + tau[a].at(e, q));
        out.raw[a] = acc.topLeftCorner(d, d) / mesh.domain_volume();
    }
    out.symmetrized.resize(np);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out.symmetrized[pair_index(d, i, j)] = 0.5 * (out.raw[pair_index(d, i, j)] + out.raw[pair_index(d, j, i)]);
    return out;
}

CellResult run_cell_problems(int dim, int n, const GeometrySpec& geometry, const CellOptions& options) {
    auto mesh = std::make_shared<const PeriodicMesh>(build_unit_cell_mesh(dim, n));
    CellResult result;
    CellSolutionSet& cells = result.cells;
    cells.mesh = mesh;
    cells.material = assign_material(*mesh, geometry);

    for (int i = 0; i < dim; ++i) cells.scalar.push_back(solve_scalar_cell(mesh, cells.material, i, options));
    const MuEffResult mu = compute_mu_eff(cells.scalar, cells.material);
    cells.tau = compute_tau(*mesh, cells.material, cells.scalar);

    const CellStokesSystem system(mesh, cells.material, options);
    const int np = dim * dim;
    cells.viscous.resize(np);
    cells.magnetic.resize(np);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            cells.viscous[pair_index(dim, i, j)] = solve_viscous_cell(system, i, j);
            cells.magnetic[pair_index(dim, i, j)] = solve_magnetic_cell(system, cells.tau[pair_index(dim, i, j)], i, j);
        }
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < i; ++j) {
            cells.viscous[pair_index(dim, i, j)] = cells.viscous[pair_index(dim, j, i)];
            cells.viscous[pair_index(dim, i, j)].i = i;
            cells.viscous[pair_index(dim, i, j)].j = j;
            cells.magnetic[pair_index(dim, i, j)] = cells.magnetic[pair_index(dim, j, i)];
            cells.magnetic[pair_index(dim, i, j)].i = i;
            cells.magnetic[pair_index(dim, i, j)].j = j;
        }

    const NResult N = compute_N(system, cells.viscous);
    const BResult B = compute_B(*mesh, cells.magnetic, cells.tau);

    EffectiveTensors& t = result.tensors;
    t.dim = dim;
    t.mu_eff = mu.value;
    t.mu_eff_linear = mu.linear_form;
    t.mu_formula_gap = mu.formula_gap;
    t.N = N.value;
    t.N_energy = N.energy;
    t.N_direct = N.direct;
    t.N_strain_average = N.strain_average;
    t.N_formula_gap = N.formula_gap;
    t.N_asymmetry = N.asymmetry;
    t.B = B.raw;
    t.B_sym = B.symmetrized;
    t.contrast = cells.material.contrast;
    t.solid_fraction = solid_fraction(*mesh, cells.material);
    t.geometry = geometry;
    t.resolution = n;
    t.options = options;
    return result;
}

} // namespace maghom::cell
