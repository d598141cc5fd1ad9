#include "maghom/error.hpp"
#include "maghom/fem/assembly.hpp"
#include "maghom/fem/dofmap.hpp"
#include "maghom/fem/fields.hpp"
#include "maghom/fem/q1.hpp"
#include "maghom/fem/solvers.hpp"
#include "maghom/fem/stokes.hpp"
#include "manufactured.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace maghom;
using namespace maghom::fem;

using namespace manufactured;

TEST_CASE("Q1 shape functions form a partition of unity") {
    const Q1Element el(2, {0.25, 0.5, 1.0}, 3);
    for (int q = 0; q < el.num_qp(); ++q) {
        double s = 0.0, gx = 0.0, gy = 0.0;
        for (int a = 0; a < el.num_nodes(); ++a) {
            s += el.shape(q, a);
            gx += el.grad(q, a, 0);
            gy += el.grad(q, a, 1);
        }
        CHECK(s == doctest::Approx(1.0));
        CHECK(std::abs(gx) < 1e-12);
        CHECK(std::abs(gy) < 1e-12);
    }
    CHECK(el.load().sum() == doctest::Approx(0.125));
    CHECK(el.mass().sum() == doctest::Approx(0.125));
    const Mat k = el.stiffness(Mat::Identity(2, 2));
    CHECK(k.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Gauss rule matches an independent Legendre construction") {
    std::vector<double> x, w, xo, wo;
    for (int n = 1; n <= 3; ++n) {
        gauss_rule(n, x, w);
        oracle::gauss(n, xo, wo);
        std::sort(x.begin(), x.end());
        std::sort(xo.begin(), xo.end());
        for (int k = 0; k < n; ++k) CHECK(x[k] == doctest::Approx(xo[k]).epsilon(1e-12));
        double moment = 0.0;
        for (int k = 0; k < n; ++k) moment += w[k] * std::pow(x[k], 2 * n - 1);
        CHECK(moment == doctest::Approx(1.0 / (2 * n)).epsilon(1e-12));
    }
}

TEST_CASE("sparse matrix symmetry defect") {
    const Triplets t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}};
    const auto a = SparseMatrix::from_triplets(2, 2, t, true);
    CHECK(a.symmetry_defect() == 0.0);
    const Triplets u{{0, 0, 2.0}, {0, 1, 1.0}, {1, 1, 3.0}};
    CHECK(SparseMatrix::from_triplets(2, 2, u, false).symmetry_defect() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("conjugate gradients agree with a dense Cholesky solve") {
    const auto mesh = build_box_mesh(2, {1.0, 1.0, 1.0}, 8);
    const auto mat = uniform(mesh, 2.0);
    SparseMatrix k = assemble_scalar_diffusion(mesh, mat);
    Csr shifted = k.csr();
    for (int i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) += 0.1;
    const SparseMatrix a(shifted, true);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec b(a.rows());
    for (int i = 0; i < b.size(); ++i) b(i) = u(rng);
    SolveStats stats;
    const Vec x = solve_spd(a, b, 1e-12, {}, &stats);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(shifted);
    const Vec ref = dense.llt().solve(b);
    CHECK((x - ref).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(stats.relative_residual <= 1e-12);
}

TEST_CASE("conjugate gradients report non-convergence") {
    const auto mesh = build_box_mesh(2, {1.0, 1.0, 1.0}, 16);
    const auto mat = uniform(mesh);
    SparseMatrix k = assemble_scalar_diffusion(mesh, mat);
    Csr shifted = k.csr();
    for (int i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) += 1e-3;
    SpdOptions opts;
    opts.max_iterations = 2;
    CHECK_THROWS_AS(solve_spd(SparseMatrix(shifted, true), Vec::Ones(shifted.rows()), 1e-12, opts), NoConvergence);
}

TEST_CASE("periodic Poisson converges at second order") {
    auto err = [](int n) {
        const auto mesh = cell_mesh(n);
        const auto k = assemble_scalar_diffusion(*mesh, Mat::Identity(2, 2));
        Vec b = Vec::Zero(mesh->num_dof_nodes());
        const Q1Element el(2, {mesh->h(0), mesh->h(1), 1.0}, 3);
        auto exact = [](const Point& x) { return std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); };
        for (int e = 0; e < mesh->num_elements(); ++e)
            for (int q = 0; q < el.num_qp(); ++q) {
                const double f = 2.0 * kTwoPi * kTwoPi * exact(map_to_physical(*mesh, e, el.qp(q)));
                for (int a = 0; a < 4; ++a)
                    b(mesh->dof_node(mesh->element_node(e, a))) += el.weight(q) * el.shape(q, a) * f;
            }
        SpdOptions opts;
        opts.kernel.push_back(Vec::Ones(b.size()));
        const ScalarField u(mesh, solve_spd(k, b, 1e-12, opts));
        return std::sqrt(oracle::integrate(*mesh, 4, [&](int e, const Point& ref, const Point& x) {
            return std::pow(u.value(e, ref) - exact(x), 2);
        }));
    };
    const double e1 = err(16), e2 = err(32);
    CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("manufactured periodic Stokes velocity converges at rate >= 1.8") {
    const double e16 = manufactured_error(16);
    const double e32 = manufactured_error(32);
    MESSAGE("L2 errors " << e16 << " " << e32 << " rate " << std::log2(e16 / e32));
    CHECK(std::log2(e16 / e32) >= 1.8);
}

TEST_CASE("cavity MINRES solve matches a dense LU solve") {
    const auto mesh = std::make_shared<const PeriodicMesh>(build_box_mesh(2, {1.0, 1.0, 1.0}, 8));
    const auto mat = uniform(*mesh);
    const auto blocks = assemble_stokes(*mesh, mat, 0.5);
    DofMap v(*mesh, 2);
    v.set_dirichlet_boundary(*mesh);
    v.finalize();
    const DofMap p = pressure_dofmap(*mesh, blocks);
    const Vec f = body_load(*mesh, [](const Point& x) {
        return Vec3(std::sin(M_PI * x[1]) * x[0], std::cos(M_PI * x[0]) * x[1] * x[1], 0.0);
    });
    const double tol = 1e-12;
    const auto sol = solve_constrained_stokes(*mesh, blocks, v, f, tol);

    const ReducedSaddle red = apply_constraints(blocks.A, blocks.Bdiv, blocks.Cstab, v, p, Vec::Zero(v.full_size()), f,
                                                Vec::Zero(p.full_size()));
    const int nu = red.A.rows(), np = red.C.rows();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nu + np + 1, nu + np + 1);
    k.topLeftCorner(nu, nu) = Eigen::MatrixXd(red.A.csr());
    k.block(0, nu, nu, np) = -Eigen::MatrixXd(red.Bdiv.csr()).transpose();
    k.block(nu, 0, np, nu) = -Eigen::MatrixXd(red.Bdiv.csr());
    k.block(nu, nu, np, np) = -Eigen::MatrixXd(red.C.csr());
    k.block(nu + np, nu, 1, np).setOnes();
    k.block(nu, nu + np, np, 1).setOnes();
    Vec rhs = Vec::Zero(nu + np + 1);
    rhs.head(nu) = red.f;
    const Vec x = k.fullPivLu().solve(rhs);
    const Vec u = v.expand(x.head(nu));
    CHECK((u - sol.u).cwiseAbs().maxCoeff() < 1e-8 * u.cwiseAbs().maxCoeff());
    CHECK(sol.energy_defect() <= 10.0 * tol);
    CHECK(u.cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("direct and MINRES saddle solvers agree") {
    const auto mesh = std::make_shared<const PeriodicMesh>(build_box_mesh(2, {1.0, 1.0, 1.0}, 8));
    const auto blocks = assemble_stokes(*mesh, uniform(*mesh), 0.5);
    DofMap v(*mesh, 2);
    v.set_dirichlet_boundary(*mesh);
    v.finalize();
    const Vec f = body_load(*mesh, [](const Point& x) { return Vec3(x[1] - 0.5, 0.0, 0.0); });
    const auto a = solve_constrained_stokes(*mesh, blocks, v, f, 1e-12, SaddleMethod::Minres);
    const auto b = solve_constrained_stokes(*mesh, blocks, v, f, 1e-12, SaddleMethod::Direct);
    CHECK((a.u - b.u).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("rigid groups prolong to rigid motions") {
    const auto mesh = build_unit_cell_mesh(2, 8);
    DofMap v(mesh, 2);
    std::vector<int> nodes{mesh.dof_node(mesh.node_at({3, 3, 0})), mesh.dof_node(mesh.node_at({4, 3, 0})),
                           mesh.dof_node(mesh.node_at({4, 5, 0}))};
    const Point c{0.5, 0.5, 0.0};
    const int g = v.add_rigid_group(nodes, c);
    v.finalize();
    Vec z = Vec::Zero(v.reduced_size());
    const int off = v.groups()[g].offset;
    z(off) = 1.0;
    z(off + 1) = 2.0;
    z(off + 2) = 3.0;
    const Vec u = v.expand(z);
    for (int dof : nodes) {
        const Point x = mesh.node_coords(mesh.node_of_dof(dof));
        CHECK(u(dof * 2) == doctest::Approx(1.0 - 3.0 * (x[1] - c[1])));
        CHECK(u(dof * 2 + 1) == doctest::Approx(2.0 + 3.0 * (x[0] - c[0])));
    }
    CHECK(v.rigid_translation(g, z)(1) == doctest::Approx(2.0));
    CHECK(v.rigid_rotation(g, z)(0) == doctest::Approx(3.0));
}

TEST_CASE("pressure splits across permeability interfaces") {
    const auto mesh = build_unit_cell_mesh(2, 8);
    GeometrySpec g;
    g.shape = GeometrySpec::Shape::Layered;
    g.mu_primary = 1.0;
    g.mu_secondary = 3.0;
    const auto blocks = assemble_stokes(mesh, assign_material(mesh, g), 0.5);
    CHECK(blocks.pressure_blocks == 2);
    StokesOptions joined;
    joined.split_pressure = false;
    CHECK(assemble_stokes(mesh, assign_material(mesh, g), 0.5, joined).pressure_blocks == 1);
    CHECK(blocks.A.symmetry_defect() < 1e-12);
    CHECK(blocks.Cstab.symmetry_defect() < 1e-12);
}
