#pragma once

#include "maghom/fem/dofmap.hpp"
#include "maghom/fem/fields.hpp"
#include "maghom/fem/sparse.hpp"
#include "maghom/grid.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace maghom::fem {

/// Stiffness of int mu grad(phi) . grad(tau) with element-wise mu.
SparseMatrix assemble_scalar_diffusion(const PeriodicMesh& mesh, const MaterialField& material);
/// Same with a constant (possibly anisotropic) coefficient matrix.
SparseMatrix assemble_scalar_diffusion(const PeriodicMesh& mesh, const Mat& coefficient);

/// Lumped (row-sum) scalar mass; elements with mask[e] == 0 are skipped when
/// a mask is given.
Vec lumped_mass(const PeriodicMesh& mesh, const std::vector<char>& element_mask = {});

struct StokesOptions {
    /// Brezzi-Pitkaranta parameter delta in delta h^2 / (2 viscosity_scale) int grad p . grad q.
    double stabilization = 0.1;
    /// 0 assembles the viscous block over fluid elements only (rigid
    /// elimination path); a positive factor multiplies the viscosity on solid
    /// elements instead (penalty path).
    double solid_viscosity_factor = 0.0;
    /// Anisotropic viscosity tensor N (defaults to Q:Q, i.e. D(u):D(v)).
    std::optional<Tensor4> viscosity_tensor;
    /// Separate pressure unknowns per fluid permeability value, so the pressure
    /// may jump across magnetic interfaces.
    bool split_pressure = true;
};

/// Equal-order Q1/Q1 stabilized Stokes blocks on the full (periodic-folded)
/// spaces: A = 2 scale int D(v):N:D(u), Bdiv = int q div v and
/// Cstab = delta h^2 int grad p . grad q, the latter two over fluid elements.
struct StokesBlocks {
    SparseMatrix A;
    SparseMatrix Bdiv;
    SparseMatrix Cstab;
    /// Pressure index = node * pressure_blocks + element_block[e]; -1 on solid.
    int pressure_blocks = 1;
    std::vector<int> element_block;
    /// Pressure indices touched by at least one fluid element.
    std::vector<char> pressure_node;
    /// Lumped mass over fluid elements (pressure zero-mean weights).
    Vec pressure_weights;
    /// Per-element viscosity multiplier actually used (0 on excluded solid).
    std::vector<double> element_viscosity;
    /// delta h^2 / (2 viscosity_scale).
    double stabilization_coefficient = 0.0;
};

StokesBlocks assemble_stokes(const PeriodicMesh& mesh, const MaterialField& material, double viscosity_scale,
                             const StokesOptions& options = {});

/// Pressure DofMap with every untouched pressure index fixed at zero.
DofMap pressure_dofmap(const PeriodicMesh& mesh, const StokesBlocks& blocks);

/// Pressure values wrapped with the block layout of `blocks`.
ScalarField pressure_field(std::shared_ptr<const PeriodicMesh> mesh, const StokesBlocks& blocks, Vec values);

/// Consistency term -coefficient int f . grad q of the stabilized continuity
/// row for a constant body force f, over fluid elements where mask is set.
Vec stabilization_load(const PeriodicMesh& mesh, const StokesBlocks& blocks, const Vec3& f,
                       const std::vector<char>& element_mask = {});

/// int g . v over elements where mask is set (all when empty).
Vec load_body_force(const PeriodicMesh& mesh, const Vec3& g, const std::vector<char>& element_mask = {});

/// int S : D(v) for a symmetric tensor field given at the 2-point Gauss points.
Vec load_stress(const PeriodicMesh& mesh, const TensorQuadField& stress, const std::vector<char>& element_mask = {});

/// int F . grad(tau) for a vector field given at the 2-point Gauss points.
Vec load_flux(const PeriodicMesh& mesh, const VectorQuadField& flux);

/// int_{dOmega} (k . n) tau ds with a 2-point rule on every boundary face.
Vec load_neumann(const PeriodicMesh& mesh, const std::function<Vec3(const Point&)>& k);

/// Discrete int_{dOmega} k . n ds with the same face rule as load_neumann.
double boundary_flux(const PeriodicMesh& mesh, const std::function<Vec3(const Point&)>& k);

/// Fluid-element mask (1 on fluid).
std::vector<char> fluid_mask(const MaterialField& material);

/// Physical coordinates of reference point `ref` in element e.
Point map_to_physical(const PeriodicMesh& mesh, int e, const Point& ref);

} // namespace maghom::fem
