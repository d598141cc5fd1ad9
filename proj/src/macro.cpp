#include "maghom/macro.hpp"

#include "maghom/error.hpp"
#include "maghom/fem/q1.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace maghom::macro {

using fem::Q1Element;

namespace {

Point mesh_h(const PeriodicMesh& mesh) { return {mesh.h(0), mesh.h(1), mesh.h(2)}; }

MaterialField all_fluid(const PeriodicMesh& mesh) {
    MaterialField m;
    m.mu.assign(mesh.num_elements(), 1.0);
    m.phase.assign(mesh.num_elements(), Phase::Fluid);
    m.particle.assign(mesh.num_elements(), -1);
    return m;
}

Mat3 deviatoric(const Mat3& e, int d) {
    Mat3 out = e;
    const double tr = e.trace() / d;
    for (int k = 0; k < d; ++k) out(k, k) -= tr;
    return out;
}

} // namespace

Vec3 FluxSpec::evaluate(const Point& x, const Point& lengths) const {
    switch (kind) {
    case Kind::Constant: return amplitude * vector;
    case Kind::Trigonometric: {
        constexpr double pi = std::numbers::pi;
        const double a = pi * x[0] / lengths[0], b = pi * x[1] / lengths[1];
        return amplitude * Vec3(-lengths[0] * std::cos(a) * std::sin(b), lengths[1] * std::sin(a) * std::cos(b), 0.0);
    }
    case Kind::Affine: return amplitude * (vector + gradient * Vec3(x[0], x[1], x[2]));
    }
    return Vec3::Zero();
}

std::string to_string(FluxSpec::Kind kind) {
    switch (kind) {
    case FluxSpec::Kind::Constant: return "constant";
    case FluxSpec::Kind::Trigonometric: return "trigonometric";
    case FluxSpec::Kind::Affine: return "affine";
    }
    return "constant";
}

FluxSpec::Kind flux_kind_from_string(const std::string& name) {
    if (name == "constant") return FluxSpec::Kind::Constant;
    if (name == "trigonometric") return FluxSpec::Kind::Trigonometric;
    if (name == "affine") return FluxSpec::Kind::Affine;
    throw ValidationError("unknown flux kind '" + name + "' (expected constant, trigonometric or affine)");
}

double check_flux(const PeriodicMesh& m, const FluxSpec& flux) {
    const int d = m.dim();
    const auto k = [&](const Point& x) { return flux.evaluate(x, m.lengths()); };
    const double net = fem::boundary_flux(m, k);
    double kmax = 0.0, area = 0.0;
    for (int node = 0; node < m.num_nodes(); ++node)
        if (m.on_boundary(node)) kmax = std::max(kmax, k(m.node_coords(node)).norm());
    for (const auto& face : m.boundary_faces()) {
        double a = 1.0;
        for (int c = 0; c < d; ++c)
            if (c != face.axis) a *= m.h(c);
        area += a;
    }
    if (std::abs(net) > 1e-10 * std::max(kmax * area, 1e-300))
        throw IncompatibleFlux("net boundary flux " + std::to_string(net) + " is not zero");
    return net;
}

ScalarField solve_neumann_potential(std::shared_ptr<const PeriodicMesh> mesh, const fem::SparseMatrix& stiffness,
                                    const FluxSpec& flux, double tol, fem::SolveStats* stats) {
    const PeriodicMesh& m = *mesh;
    const Vec b = fem::load_neumann(m, [&](const Point& x) { return flux.evaluate(x, m.lengths()); });
    fem::SpdOptions so;
    so.kernel.push_back(Vec::Ones(m.num_dof_nodes()));
    Vec phi = fem::solve_spd(stiffness, b, tol, so, stats);
    const Vec w = fem::lumped_mass(m);
    phi.array() -= w.dot(phi) / w.sum();
    return ScalarField(std::move(mesh), std::move(phi));
}

PotentialResult solve_macro_potential(std::shared_ptr<const PeriodicMesh> mesh, const Mat& mu_eff,
                                      const MacroConfig& config) {
    const PeriodicMesh& m = *mesh;
    const int d = m.dim();
    if (mu_eff.rows() != d || mu_eff.cols() != d) throw NotSPD("effective permeability has the wrong dimension");
    const double scale = mu_eff.cwiseAbs().maxCoeff();
    if ((mu_eff - mu_eff.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NotSPD("effective permeability is not symmetric");
    const Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (mu_eff + mu_eff.transpose()));
    if (!(eig.eigenvalues().minCoeff() > 0.0))
        throw NotSPD("effective permeability has a non-positive eigenvalue " +
                     std::to_string(eig.eigenvalues().minCoeff()));

    PotentialResult out;
    out.boundary_flux = check_flux(m, config.k);
    const fem::SparseMatrix A = fem::assemble_scalar_diffusion(m, Mat(0.5 * (mu_eff + mu_eff.transpose())));
    out.phi = solve_neumann_potential(std::move(mesh), A, config.k, config.tol, &out.stats);
    return out;
}

TensorQuadField effective_maxwell_stress(const ScalarField& phi0, const std::vector<Mat>& B_sym, double S) {
    const PeriodicMesh& m = phi0.mesh();
    const int d = m.dim();
    const Q1Element el(d, mesh_h(m));
    TensorQuadField out(m.num_elements(), el.num_qp(), Mat3::Zero());
    for (int e = 0; e < m.num_elements(); ++e)
        for (int q = 0; q < el.num_qp(); ++q) {
            const Vec3 g = phi0.gradient(e, el.qp(q));
            Mat3& s = out.at(e, q);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s.topLeftCorner(d, d) += S * g(i) * g(j) * B_sym[i * d + j];
        }
    return out;
}

FlowResult solve_macro_flow(std::shared_ptr<const PeriodicMesh> mesh, const Tensor4& N, const std::vector<Mat>& B_sym,
                            const ScalarField& phi0, const MacroConfig& config) {
    const PeriodicMesh& m = *mesh;
    const MaterialField fluid = all_fluid(m);
    fem::StokesOptions so;
    so.viscosity_tensor = N;
    const fem::StokesBlocks blocks = fem::assemble_stokes(m, fluid, 1.0 / config.Re, so);

    fem::DofMap velocity(m, m.dim());
    velocity.set_dirichlet_boundary(m);
    velocity.finalize();

    FlowResult out;
    out.maxwell = effective_maxwell_stress(phi0, B_sym, config.S);
    const Vec3 body = config.g / (config.Fr * config.Fr);
    const Vec f = fem::load_body_force(m, body) - fem::load_stress(m, out.maxwell);
    const Vec g = fem::stabilization_load(m, blocks, body);
    out.solve = fem::solve_constrained_stokes(m, blocks, velocity, f, config.tol, config.method, g);
    out.u = VectorField(mesh, out.solve.u);
    out.pi = fem::pressure_field(mesh, blocks, out.solve.p);
    return out;
}

MacroState solve_macro(const cell::EffectiveTensors& tensors, const MacroConfig& config) {
    auto mesh = std::make_shared<const PeriodicMesh>(build_box_mesh(tensors.dim, config.lengths, config.n));
    MacroState state;
    state.mesh = mesh;
    state.config = config;
    PotentialResult pot = solve_macro_potential(mesh, tensors.mu_eff, config);
    state.phi0 = pot.phi;
    state.potential_stats = pot.stats;
    state.boundary_flux = pot.boundary_flux;
    FlowResult flow = solve_macro_flow(mesh, tensors.N, tensors.B_sym, state.phi0, config);
    state.u0 = flow.u;
    state.pi0 = flow.pi;
    state.maxwell = std::move(flow.maxwell);
    state.flow_stats = flow.solve.stats;
    state.energy_defect = flow.solve.energy_defect();
    return state;
}

ReconstructedFields::ReconstructedFields(std::shared_ptr<const MacroState> macro,
                                         std::shared_ptr<const cell::CellSolutionSet> cells, double eps)
    : macro_(std::move(macro)), cells_(std::move(cells)), eps_(eps) {}

ReconstructedFields::Sample ReconstructedFields::at(const Point& x) const {
    const PeriodicMesh& mm = *macro_->mesh;
    const PeriodicMesh& cm = *cells_->mesh;
    const int d = mm.dim();
    const double S = macro_->config.S;
    const double Re = macro_->config.Re;

    Sample s;
    Point ref;
    const int e = mm.locate(x, ref);
    s.grad_phi0 = macro_->phi0.gradient(e, ref);
    s.strain0_full = macro_->u0.strain(e, ref);
    s.strain0 = deviatoric(s.strain0_full, d);
    s.pi0 = macro_->pi0.value(e, ref);

    Point y{0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) y[k] = x[k] / eps_;
    Point yref;
    const int ce = cm.locate(y, yref);

    s.phi1 = 0.0;
    s.grad_y_phi1.setZero();
    for (int i = 0; i < d; ++i) {
        s.phi1 += s.grad_phi0(i) * cells_->scalar[i].omega.value(ce, yref);
        s.grad_y_phi1 += s.grad_phi0(i) * cells_->scalar[i].omega.gradient(ce, yref);
    }

    s.u1.setZero();
    s.strain_y_u1.setZero();
    s.p0 = s.pi0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int a = i * d + j;
            const double dij = s.strain0(i, j);
            const double mij = S * s.grad_phi0(i) * s.grad_phi0(j);
            const double vij = 0.5 * Re * mij;
            const auto& vis = cells_->viscous[a];
            const auto& mag = cells_->magnetic[a];
            s.u1 += -dij * vis.chi.value(ce, yref) + vij * mag.xi.value(ce, yref);
            s.strain_y_u1 += -dij * vis.chi.strain(ce, yref) + vij * mag.xi.strain(ce, yref);
            s.p0 += (2.0 / Re) * dij * vis.q.value(ce, yref) - mij * mag.r.value(ce, yref);
        }

    Vec3 mvec = s.grad_phi0 + s.grad_y_phi1;
    Mat3 eye = Mat3::Zero();
    for (int k = 0; k < d; ++k) eye(k, k) = 1.0;
    s.T0 = S * cells_->material.mu[ce] * (mvec * mvec.transpose() - 0.5 * mvec.squaredNorm() * eye);
    return s;
}

} // namespace maghom::macro
