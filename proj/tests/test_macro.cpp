#include "maghom/cell.hpp"
#include "maghom/error.hpp"
#include "maghom/fem/q1.hpp"
#include "maghom/macro.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace maghom;
using fem::Mat3;
using fem::Vec3;

namespace {

cell::EffectiveTensors plain_tensors(const Mat& mu, double c = 1.0) {
    cell::EffectiveTensors t;
    t.dim = 2;
    t.mu_eff = mu;
    t.N = Tensor4::symmetric_identity(2);
    t.B.assign(4, Mat::Zero(2, 2));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Mat b = Mat::Zero(2, 2);
            // tau^ij of an empty cell: c (e_i x e_j + e_j x e_i) / 2 - c delta_ij I / 2
            b(i, j) += 0.5 * c;
            b(j, i) += 0.5 * c;
            if (i == j) b -= 0.5 * c * Mat::Identity(2, 2);
            t.B[i * 2 + j] = b;
        }
    t.B_sym = t.B;
    return t;
}

} // namespace

TEST_CASE("constant flux gives the exact linear potential") {
    Mat mu(2, 2);
    mu << 2.0, 0.5, 0.5, 1.0;
    macro::MacroConfig cfg;
    cfg.n = 8;
    cfg.k.vector = Vec3(1.0, 1.0, 0.0);
    cfg.tol = 1e-12;
    const auto mesh = std::make_shared<const PeriodicMesh>(build_box_mesh(2, cfg.lengths, cfg.n));
    const auto pot = macro::solve_macro_potential(mesh, mu, cfg);
    const Eigen::Vector2d expected = mu.inverse() * Eigen::Vector2d(1.0, 1.0);
    for (const Point& x : {Point{0.1, 0.2, 0}, Point{0.77, 0.4, 0}, Point{0.5, 0.95, 0}}) {
        const Vec3 g = pot.phi.gradient_at(x);
        CHECK(g(0) == doctest::Approx(expected(0)).epsilon(1e-9));
        CHECK(g(1) == doctest::Approx(expected(1)).epsilon(1e-9));
    }
    CHECK(std::abs(pot.boundary_flux) < 1e-12);
}

TEST_CASE("incompatible boundary flux is rejected") {
    macro::MacroConfig cfg;
    cfg.n = 8;
    cfg.k.kind = macro::FluxSpec::Kind::Affine;
    cfg.k.vector = Vec3::Zero();
    cfg.k.gradient = Mat3::Identity();
    const auto mesh = build_box_mesh(2, cfg.lengths, cfg.n);
    CHECK_THROWS_AS(macro::check_flux(mesh, cfg.k), IncompatibleFlux);
    cfg.k.kind = macro::FluxSpec::Kind::Trigonometric;
    CHECK(std::abs(macro::check_flux(mesh, cfg.k)) < 1e-12);
}

TEST_CASE("indefinite permeability is rejected") {
    Mat mu(2, 2);
    mu << 1.0, 0.0, 0.0, -1.0;
    macro::MacroConfig cfg;
    cfg.n = 8;
    const auto mesh = std::make_shared<const PeriodicMesh>(build_box_mesh(2, cfg.lengths, cfg.n));
    CHECK_THROWS_AS(macro::solve_macro_potential(mesh, mu, cfg), NotSPD);
}

TEST_CASE("gravity alone is balanced by a hydrostatic pressure") {
    for (int n : {8, 16}) {
        macro::MacroConfig cfg;
        cfg.n = n;
        cfg.Fr = 0.5;
        cfg.g = Vec3(0.0, 1.0, 0.0);
        cfg.tol = 1e-12;
        const auto state = macro::solve_macro(plain_tensors(Mat::Identity(2, 2)), cfg);
        CHECK(state.u0.values().cwiseAbs().maxCoeff() < 1e-9);
        const Vec3 gp = state.pi0.gradient_at({0.3, 0.6, 0.0});
        CHECK(gp(1) == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(std::abs(gp(0)) < 1e-9);
        CHECK(state.energy_defect <= 10.0 * cfg.tol);
    }
}

TEST_CASE("macro flow satisfies the weak momentum balance") {
    macro::MacroConfig cfg;
    cfg.n = 16;
    cfg.Re = 2.0;
    cfg.S = 1.5;
    cfg.g = Vec3(0.3, -1.0, 0.0);
    cfg.k.kind = macro::FluxSpec::Kind::Trigonometric;
    cfg.tol = 1e-12;
    const auto state = macro::solve_macro(plain_tensors(Mat::Identity(2, 2), 2.0), cfg);
    const PeriodicMesh& m = *state.mesh;
    CHECK(state.u0.values().cwiseAbs().maxCoeff() > 1e-4);
    CHECK(state.energy_defect <= 10.0 * cfg.tol);

    const fem::Q1Element el(2, {m.h(0), m.h(1), 1.0}, 2);
    std::mt19937 rng(99);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec nodal = Vec::Zero(m.num_dof_nodes() * 2);
        for (int node = 0; node < m.num_nodes(); ++node)
            if (!m.on_boundary(node))
                for (int i = 0; i < 2; ++i) nodal(m.dof_node(node) * 2 + i) = normal(rng);
        const fem::VectorField v(state.mesh, nodal);
        double residual = 0.0, scale = 0.0;
        for (int e = 0; e < m.num_elements(); ++e)
            for (int q = 0; q < el.num_qp(); ++q) {
                const Point& ref = el.qp(q);
                const Mat3 du = state.u0.strain(e, ref);
                const Mat3 dv = v.strain(e, ref);
                // effective stress with N the symmetric identity
                const Mat3 sigma = (2.0 / cfg.Re) * du - state.pi0.value(e, ref) * Mat3::Identity() +
                                   state.maxwell.at(e, q);
                const double body = (cfg.g / (cfg.Fr * cfg.Fr)).dot(v.value(e, ref));
                double contraction = 0.0;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) contraction += sigma(i, j) * dv(i, j);
                residual += el.weight(q) * (contraction - body);
                scale += el.weight(q) * (std::abs(contraction) + std::abs(body));
            }
        CHECK(std::abs(residual) <= 1e-8 * scale);
    }
}

TEST_CASE("effective Maxwell stress contracts B with the potential gradient") {
    macro::MacroConfig cfg;
    cfg.n = 8;
    cfg.k.vector = Vec3(1.0, 0.0, 0.0);
    const auto mesh = std::make_shared<const PeriodicMesh>(build_box_mesh(2, cfg.lengths, cfg.n));
    const auto pot = macro::solve_macro_potential(mesh, 2.0 * Mat::Identity(2, 2), cfg);
    const auto t = plain_tensors(2.0 * Mat::Identity(2, 2), 2.0);
    const auto T = macro::effective_maxwell_stress(pot.phi, t.B_sym, 3.0);
    // grad phi0 = e1 / 2, so T = 3 (1/4) B^11 = 3/4 diag(1, -1)
    CHECK(T.at(5, 1)(0, 0) == doctest::Approx(0.75));
    CHECK(T.at(5, 1)(1, 1) == doctest::Approx(-0.75));
    CHECK(std::abs(T.at(5, 1)(0, 1)) < 1e-12);
}

TEST_CASE("reconstruction on a uniform cell has no correctors") {
    auto r = cell::run_cell_problems(2, 8, GeometrySpec{});
    macro::MacroConfig cfg;
    cfg.n = 8;
    cfg.S = 1.0;
    cfg.g = Vec3(0.0, 1.0, 0.0);
    cfg.k.kind = macro::FluxSpec::Kind::Trigonometric;
    const auto state = std::make_shared<const macro::MacroState>(macro::solve_macro(r.tensors, cfg));
    const auto cells = std::make_shared<const cell::CellSolutionSet>(std::move(r.cells));
    const macro::ReconstructedFields fields(state, cells, 0.25);
    const auto s = fields.at({0.37, 0.61, 0.0});
    CHECK(std::abs(s.phi1) < 1e-9);
    CHECK(s.grad_y_phi1.norm() < 1e-9);
    CHECK(s.u1.norm() < 1e-9);
    CHECK(s.p0 == doctest::Approx(s.pi0));
    CHECK(fields.S() == 1.0);
}

TEST_CASE("flux kinds round-trip through their names") {
    for (auto k : {macro::FluxSpec::Kind::Constant, macro::FluxSpec::Kind::Trigonometric, macro::FluxSpec::Kind::Affine})
        CHECK(macro::flux_kind_from_string(macro::to_string(k)) == k);
    CHECK_THROWS_AS(macro::flux_kind_from_string("spiral"), ValidationError);
}
