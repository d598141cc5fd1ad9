#pragma once

#include "maghom/fem/assembly.hpp"
#include "maghom/fem/dofmap.hpp"
#include "maghom/fem/solvers.hpp"

namespace maghom::fem {

struct StokesSolution {
    Vec u; // full velocity (Dirichlet/rigid constraints applied)
    Vec p; // full pressure, zero off the pressure nodes, zero mean over the fluid
    Vec reduced_u;
    SolveStats stats;
    // discrete energy identity a(u,u) + c(p,p) + p . g = l(u)
    double a_uu = 0.0;
    double c_pp = 0.0;
    double pressure_load = 0.0;
    double load = 0.0;

    double energy_defect() const;
};

/// Stabilized Stokes solve with homogeneous constraints: pressure unknowns on
/// `blocks.pressure_node`, velocity constraints from `velocity` (finalized).
/// `g` is the continuity right-hand side (zero when empty).
StokesSolution solve_constrained_stokes(const PeriodicMesh& mesh, const StokesBlocks& blocks, const DofMap& velocity,
                                        const Vec& f, double tol, SaddleMethod method = SaddleMethod::Minres,
                                        const Vec& g = Vec());

} // namespace maghom::fem
