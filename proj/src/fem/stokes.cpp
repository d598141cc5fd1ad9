#include "maghom/fem/stokes.hpp"

#include <cmath>

namespace maghom::fem {

double StokesSolution::energy_defect() const {
    const double scale = std::abs(a_uu) + std::abs(c_pp) + std::abs(pressure_load) + std::abs(load);
    return scale == 0.0 ? 0.0 : std::abs(a_uu + c_pp + pressure_load - load) / scale;
}

StokesSolution solve_constrained_stokes(const PeriodicMesh& mesh, const StokesBlocks& blocks, const DofMap& velocity,
                                        const Vec& f, double tol, SaddleMethod method, const Vec& g) {
    const DofMap pressure = pressure_dofmap(mesh, blocks);

    const Vec lift = Vec::Zero(velocity.full_size());
    const Vec gp = g.size() == 0 ? Vec(Vec::Zero(pressure.full_size())) : g;
    const ReducedSaddle red = apply_constraints(blocks.A, blocks.Bdiv, blocks.Cstab, velocity, pressure, lift, f, gp);
    SaddleOptions so;
    so.method = method;
    so.velocity_kernel = velocity.kernel();
    so.pressure_kernel.push_back(Vec::Ones(pressure.reduced_size()));
    const SaddleSolution s = solve_saddle(red.A, red.Bdiv, red.C, red.f, red.g, tol, so);

    StokesSolution out;
    out.reduced_u = s.u;
    out.u = velocity.expand(s.u);
    out.p = pressure.expand(s.p);
    const double total = blocks.pressure_weights.sum();
    if (total > 0.0) {
        const double mean = blocks.pressure_weights.dot(out.p) / total;
        for (int k = 0; k < out.p.size(); ++k)
            if (blocks.pressure_node[k]) out.p(k) -= mean;
    }
    out.stats = s.stats;
    out.a_uu = out.u.dot(blocks.A * out.u);
    out.c_pp = out.p.dot(blocks.Cstab * out.p);
    out.pressure_load = out.p.dot(gp);
    out.load = out.u.dot(f);
    return out;
}

} // namespace maghom::fem
