#include "maghom/cell.hpp"
#include "maghom/error.hpp"
#include "maghom/report.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace maghom;
using fem::Mat3;

namespace {

GeometrySpec layered(double a, double b, int axis) {
    GeometrySpec g;
    g.shape = GeometrySpec::Shape::Layered;
    g.mu_primary = a;
    g.mu_secondary = b;
    g.axis = axis;
    return g;
}

GeometrySpec disk(double r = 0.25) {
    GeometrySpec g;
    g.shape = GeometrySpec::Shape::Disk;
    g.radius = r;
    return g;
}

GeometrySpec uniform(double c) {
    GeometrySpec g;
    g.mu_primary = g.mu_secondary = c;
    return g;
}

double h1_norm(const fem::VectorField& f) {
    return std::sqrt(oracle::integrate(f.mesh(), 3, [&](int e, const Point& ref, const Point&) {
        return f.value(e, ref).squaredNorm() + f.gradient(e, ref).squaredNorm();
    }));
}

} // namespace

TEST_CASE("laminate permeability matches harmonic and arithmetic means") {
    for (int axis = 0; axis < 2; ++axis) {
        const auto r = cell::run_cell_problems(2, 64, layered(1.0, 3.0, axis));
        const Eigen::Matrix2d ref = oracle::laminate(1.0, 3.0, 0.5, axis);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(r.tensors.mu_eff(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-8));
    }
}

TEST_CASE("uniform permeability and empty cell give exact trivial limits") {
    const double c = 2.5;
    const auto r = cell::run_cell_problems(2, 16, uniform(c));
    const auto& t = r.tensors;
    CHECK((t.mu_eff - c * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(std::abs(t.N(0, 0, 0, 0) - 1.0) <= 1e-8);
    CHECK(std::abs(t.N(0, 1, 0, 1) - 0.5) <= 1e-8);
    CHECK(std::abs(t.N(0, 0, 1, 1)) <= 1e-8);
    CHECK(t.N.max_abs_difference(Tensor4::symmetric_identity(2)) <= 1e-8);
    Mat b11 = Mat::Zero(2, 2);
    b11(0, 0) = 0.5 * c;
    b11(1, 1) = -0.5 * c;
    CHECK((t.B[0] - b11).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(report::legendre_hadamard_min(t.N) >= 0.5 - 1e-6);
}

TEST_CASE("laminate magnetic corrector vanishes") {
    const auto r = cell::run_cell_problems(2, 64, layered(1.0, 3.0, 0));
    CHECK(h1_norm(r.cells.magnetic[0].xi) <= 1e-6);
    CHECK(r.tensors.B[0](0, 0) == doctest::Approx(0.75).epsilon(1e-8));
    CHECK(r.tensors.B[0](1, 1) == doctest::Approx(-0.75).epsilon(1e-8));
}

TEST_CASE("checkerboard obeys Keller duality") {
    const auto r = cell::run_cell_problems(2, 64, [] {
        GeometrySpec g;
        g.shape = GeometrySpec::Shape::Checkerboard;
        g.mu_primary = 1.0;
        g.mu_secondary = 4.0;
        return g;
    }());
    const auto& mu = r.tensors.mu_eff;
    MESSAGE("checkerboard mu_eff " << mu(0, 0) << " " << mu(1, 1));
    CHECK(std::abs(mu(0, 0) - mu(1, 1)) <= 1e-8);
    CHECK(std::abs(mu(0, 1)) <= 1e-8);
    CHECK(mu(0, 0) == doctest::Approx(oracle::checkerboard(1.0, 4.0)).epsilon(0.02));
}

TEST_CASE("a 90 degree rotation permutes every tensor") {
    const auto a = cell::run_cell_problems(2, 32, layered(1.0, 3.0, 0)).tensors;
    const auto b = cell::run_cell_problems(2, 32, layered(1.0, 3.0, 1)).tensors;
    auto s = [](int k) { return 1 - k; };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(a.mu_eff(i, j) - b.mu_eff(s(i), s(j))) <= 1e-9);
            for (int m = 0; m < 2; ++m)
                for (int n = 0; n < 2; ++n) {
                    CHECK(std::abs(a.N(i, j, m, n) - b.N(s(i), s(j), s(m), s(n))) <= 1e-9);
                    CHECK(std::abs(a.B[i * 2 + j](m, n) - b.B[s(i) * 2 + s(j)](s(m), s(n))) <= 1e-9);
                }
        }
}

TEST_CASE("dual formulas agree on every geometry") {
    GeometrySpec checker;
    checker.shape = GeometrySpec::Shape::Checkerboard;
    checker.mu_primary = 1.0;
    checker.mu_secondary = 2.0;
    GeometrySpec d = disk();
    d.mu_primary = 1.0;
    d.mu_secondary = 2.0;
    for (const auto& g : {uniform(1.5), layered(1.0, 3.0, 0), checker, d}) {
        const auto t = cell::run_cell_problems(2, 32, g).tensors;
        CHECK(t.mu_formula_gap <= 1e-8);
        CHECK(t.N_formula_gap <= 1e-8);
    }
}

TEST_CASE("disk tensors have the required structure") {
    GeometrySpec g = disk();
    g.mu_primary = 1.0;
    g.mu_secondary = 2.0;
    const auto t = cell::run_cell_problems(2, 32, g).tensors;
    const auto c = report::check_tensors(t, 1.0);
    CHECK(c.mu_symmetry <= 1e-10);
    CHECK(c.mu_min_eigenvalue >= c.mu_lower_bound - 1e-8);
    CHECK(c.N_major <= 1e-8);
    CHECK(c.N_minor_left <= 1e-8);
    CHECK(c.N_minor_right <= 1e-8);
    CHECK(c.N_minor_both <= 1e-8);
    CHECK(c.legendre_hadamard_min > 0.5);
    CHECK(t.solid_fraction > 0.15);
    // a rigid inclusion stiffens the suspension
    CHECK(t.N(0, 1, 0, 1) > 0.5);
}

TEST_CASE("viscous cell solution satisfies the weak momentum equation") {
    const auto mesh = std::make_shared<const PeriodicMesh>(build_unit_cell_mesh(2, 32));
    const auto material = assign_material(*mesh, disk());
    const cell::CellStokesSystem system(mesh, material, {});
    const auto sol = cell::solve_viscous_cell(system, 0, 1);
    const Mat3 p = cell::basis_strain(2, 0, 1);
    std::mt19937 rng(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto& dofs = system.velocity_dofs();
    const double w_norm = std::sqrt(oracle::integrate(*mesh, 3, [&](int e, const Point& ref, const Point&) {
        return material.is_solid(e) ? 0.0 : (p - sol.chi.strain(e, ref)).squaredNorm();
    }));
    for (int trial = 0; trial < 20; ++trial) {
        Vec z(dofs.reduced_size());
        for (int k = 0; k < z.size(); ++k) z(k) = normal(rng);
        const fem::VectorField v(mesh, dofs.expand(z));
        double v_norm2 = 0.0;
        const double residual = oracle::integrate(*mesh, 3, [&](int e, const Point& ref, const Point&) {
            if (material.is_solid(e)) return 0.0;
            const Mat3 dv = v.strain(e, ref);
            v_norm2 += dv.squaredNorm();
            const Mat3 dw = p - sol.chi.strain(e, ref);
            return (dw.cwiseProduct(dv)).sum() - sol.q.value(e, ref) * dv.trace();
        });
        CHECK(std::abs(residual) <= 1e-7 * w_norm * std::sqrt(v_norm2));
    }
}

TEST_CASE("penalty and elimination rigid handling agree") {
    cell::CellOptions pen;
    pen.rigid_mode = cell::RigidMode::Penalty;
    const auto a = cell::run_cell_problems(2, 32, disk()).tensors;
    const auto b = cell::run_cell_problems(2, 32, disk(), pen).tensors;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int m = 0; m < 2; ++m)
                for (int n = 0; n < 2; ++n) {
                    const double x = a.N(i, j, m, n), y = b.N(i, j, m, n);
                    CHECK(std::abs(x - y) <= 0.01 * std::max(std::abs(x), 1e-2));
                }
}

TEST_CASE("3D empty cell reproduces the symmetric identity") {
    const auto t = cell::run_cell_problems(3, 4, uniform(1.0)).tensors;
    CHECK(t.N.max_abs_difference(Tensor4::symmetric_identity(3)) <= 1e-8);
    CHECK((t.mu_eff - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("unknown rigid mode is rejected") { CHECK_THROWS_AS(cell::rigid_mode_from_string("glue"), ValidationError); }
