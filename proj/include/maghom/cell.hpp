#pragma once

#include "maghom/fem/assembly.hpp"
#include "maghom/fem/dofmap.hpp"
#include "maghom/fem/fields.hpp"
#include "maghom/fem/solvers.hpp"
#include "maghom/grid.hpp"
#include "maghom/tensor.hpp"

#include <memory>
#include <string>
#include <vector>

namespace maghom::cell {

using fem::Mat3;
using fem::ScalarField;
using fem::TensorQuadField;
using fem::VectorField;

enum class RigidMode { Elimination, Penalty };

std::string to_string(RigidMode mode);
RigidMode rigid_mode_from_string(const std::string& name);

struct CellOptions {
    double tol = 1e-10;
    RigidMode rigid_mode = RigidMode::Elimination;
    /// Viscosity multiplier on solid elements in penalty mode.
    double penalty_factor = 1e8;
    fem::SaddleMethod method = fem::SaddleMethod::Minres;
};

/// Periodic, zero-mean omega^i solving -div[mu (e^i + grad omega^i)] = 0.
struct ScalarCellSolution {
    int i = 0;
    ScalarField omega;
    fem::SolveStats stats;
};

ScalarCellSolution solve_scalar_cell(std::shared_ptr<const PeriodicMesh> mesh, const MaterialField& material, int i,
                                     const CellOptions& options = {});

struct MuEffResult {
    /// Symmetric energy form int mu (e^i + grad omega^i) . (e^j + grad omega^j).
    Mat value;
    /// Linear form int mu (delta_ij + d_i omega^j).
    Mat linear_form;
    double formula_gap = 0.0;
};

/// Throws FormulaMismatch when the two forms differ by more than 1e-6.
MuEffResult compute_mu_eff(const std::vector<ScalarCellSolution>& solutions, const MaterialField& material);

/// Trace-free strain of the cell basis field P^ij(y) = y_j e_i - delta_ij y / d.
Mat3 basis_strain(int dim, int i, int j);

/// Constant-in-cell Stokes system shared by the viscous and magnetic problems
/// of one geometry: a(u,v) = int D(u):D(v) over the fluid (or weighted by the
/// penalty viscosity), b(q,v) = int_f q div v, c = delta h^2 int_f grad p . grad q.
class CellStokesSystem {
public:
    CellStokesSystem(std::shared_ptr<const PeriodicMesh> mesh, const MaterialField& material,
                     const CellOptions& options);

    const PeriodicMesh& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const PeriodicMesh>& mesh_ptr() const noexcept { return mesh_; }
    const MaterialField& material() const noexcept { return material_; }
    const CellOptions& options() const noexcept { return options_; }
    const fem::StokesBlocks& blocks() const noexcept { return blocks_; }
    const fem::DofMap& velocity_dofs() const noexcept { return *vdofs_; }
    const fem::DofMap& pressure_dofs() const noexcept { return *pdofs_; }

    struct Solution {
        Vec u; // full periodic velocity (zero mean per component)
        Vec p; // full pressure, zero on non-pressure nodes, zero fluid mean
        Vec reduced_u;
        fem::SolveStats stats;
    };

    /// Solves a(u,v) - b(p,v) = f(v), -b(s,u) - c(p,s) = g(s) with u = P z + lift.
    Solution solve(const Vec& f, const Vec& lift) const;

private:
    std::shared_ptr<const PeriodicMesh> mesh_;
    MaterialField material_;
    CellOptions options_;
    fem::StokesBlocks blocks_;
    std::unique_ptr<fem::DofMap> vdofs_;
    std::unique_ptr<fem::DofMap> pdofs_;
    fem::ReducedSaddle reduced_;
};

/// (chi^ij, q^ij) with w = P^ij - chi^ij divergence-free in the fluid and rigid
/// in the particle.
struct ViscousCellSolution {
    int i = 0, j = 0;
    VectorField chi;
    ScalarField q;
    /// a(P^ij, v) load over the fluid (penalty-weighted in penalty mode).
    Vec basis_load;
    /// Nodal values of P^ij on rigid nodes (zero elsewhere).
    Vec lift;
    Vec rigid_dofs;
    fem::SolveStats stats;
};

ViscousCellSolution solve_viscous_cell(const CellStokesSystem& system, int i, int j);

/// tau^ij = mu [(e^i + grad omega^i) x (e^j + grad omega^j) - 1/2 (.)I] at the
/// 2-point Gauss points, index i * d + j.
std::vector<TensorQuadField> compute_tau(const PeriodicMesh& mesh, const MaterialField& material,
                                         const std::vector<ScalarCellSolution>& scalar);

/// (xi^ij, r^ij) from a(xi,v) - b(r,v) = -int_f tau^ij : D(v), xi rigid in Y_s.
struct MagneticCellSolution {
    int i = 0, j = 0;
    VectorField xi;
    ScalarField r;
    fem::SolveStats stats;
};

MagneticCellSolution solve_magnetic_cell(const CellStokesSystem& system, const TensorQuadField& tau, int i, int j);

struct NResult {
    /// Symmetrized energy form plus the isotropic part (1/d) delta_ij delta_mn.
    Tensor4 value;
    /// Energy form int D(w^ij):D(w^mn) before symmetrization (plus isotropic part).
    Tensor4 energy;
    /// Stress-average form (plus isotropic part).
    Tensor4 direct;
    /// Strain-average term Q^mn : int D(w^ij) alone, kept as a diagnostic.
    Tensor4 strain_average;
    double formula_gap = 0.0;
    double asymmetry = 0.0;
};

NResult compute_N(const CellStokesSystem& system, const std::vector<ViscousCellSolution>& solutions);

struct BResult {
    /// B^ij = (1/|Y|) int (D(xi^ij) + tau^ij), index i * d + j.
    std::vector<Mat> raw;
    /// (B^ij + B^ji) / 2.
    std::vector<Mat> symmetrized;
};

BResult compute_B(const PeriodicMesh& mesh, const std::vector<MagneticCellSolution>& magnetic,
                  const std::vector<TensorQuadField>& tau);

struct EffectiveTensors {
    int dim = 2;
    Mat mu_eff;
    Mat mu_eff_linear;
    double mu_formula_gap = 0.0;
    Tensor4 N;
    Tensor4 N_energy;
    Tensor4 N_direct;
    Tensor4 N_strain_average;
    double N_formula_gap = 0.0;
    double N_asymmetry = 0.0;
    std::vector<Mat> B;
    std::vector<Mat> B_sym;
    double contrast = 1.0;
    double solid_fraction = 0.0;
    // metadata
    GeometrySpec geometry;
    int resolution = 0;
    CellOptions options;
};

/// Every cell field needed by the first-order reconstruction.
struct CellSolutionSet {
    std::shared_ptr<const PeriodicMesh> mesh;
    MaterialField material;
    std::vector<ScalarCellSolution> scalar;     // index i
    std::vector<ViscousCellSolution> viscous;   // index i * d + j
    std::vector<MagneticCellSolution> magnetic; // index i * d + j
    std::vector<TensorQuadField> tau;           // index i * d + j
};

struct CellResult {
    CellSolutionSet cells;
    EffectiveTensors tensors;
};

/// Solves every cell problem on Y at resolution n and assembles the tensors.
/// Only the independent (i <= j) pairs are solved; (j,i) are copies.
CellResult run_cell_problems(int dim, int n, const GeometrySpec& geometry, const CellOptions& options = {});

} // namespace maghom::cell
