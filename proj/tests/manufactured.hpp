#pragma once

#include "maghom/fem/assembly.hpp"
#include "maghom/fem/dofmap.hpp"
#include "maghom/fem/fields.hpp"
#include "maghom/fem/q1.hpp"
#include "maghom/fem/stokes.hpp"
#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <memory>

namespace manufactured {

using namespace maghom;
using namespace maghom::fem;

inline std::shared_ptr<const PeriodicMesh> cell_mesh(int n) {
    return std::make_shared<const PeriodicMesh>(build_unit_cell_mesh(2, n));
}

inline MaterialField uniform(const PeriodicMesh& m, double mu = 1.0) {
    GeometrySpec g;
    g.mu_primary = g.mu_secondary = mu;
    return assign_material(m, g);
}

/// int f . N_a e_i with a 3-point rule, full (folded) indexing.
inline Vec body_load(const PeriodicMesh& m, const std::function<Vec3(const Point&)>& f) {
    const int d = m.dim();
    const Q1Element el(d, {m.h(0), m.h(1), d == 3 ? m.h(2) : 1.0}, 3);
    Vec out = Vec::Zero(m.num_dof_nodes() * d);
    for (int e = 0; e < m.num_elements(); ++e)
        for (int q = 0; q < el.num_qp(); ++q) {
            const Vec3 fx = f(map_to_physical(m, e, el.qp(q)));
            for (int a = 0; a < el.num_nodes(); ++a) {
                const int dof = m.dof_node(m.element_node(e, a));
                for (int i = 0; i < d; ++i) out(dof * d + i) += el.weight(q) * el.shape(q, a) * fx(i);
            }
        }
    return out;
}

inline constexpr double kTwoPi = 2.0 * M_PI;

inline Vec3 exact_velocity(const Point& x) {
    return Vec3(std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]), -std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]),
                0.0);
}

/// L2 velocity error of the periodic manufactured Stokes problem
/// -s Lap u + grad p = f, div u = 0 with p = sin(2 pi x) sin(2 pi y).
inline double manufactured_error(int n) {
    const auto mesh = cell_mesh(n);
    const double s = 0.5;
    const auto mat = uniform(*mesh);
    const auto blocks = assemble_stokes(*mesh, mat, s);
    DofMap v(*mesh, 2);
    v.finalize();
    const Vec f = body_load(*mesh, [&](const Point& x) {
        const Vec3 u = exact_velocity(x);
        const Vec3 gp(kTwoPi * std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]),
                      kTwoPi * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]), 0.0);
        return Vec3(s * 2.0 * kTwoPi * kTwoPi * u + gp);
    });
    const auto sol = solve_constrained_stokes(*mesh, blocks, v, f, 1e-12);
    const VectorField uh(mesh, sol.u);
    const double err2 = oracle::integrate(*mesh, 4, [&](int e, const Point& ref, const Point& x) {
        return (uh.value(e, ref) - exact_velocity(x)).squaredNorm();
    });
    return std::sqrt(err2);
}

} // namespace manufactured
