#pragma once

#include "maghom/cell.hpp"
#include "maghom/fem/stokes.hpp"
#include "maghom/macro.hpp"

#include <array>
#include <memory>
#include <vector>

namespace maghom::dns {

using fem::Mat3;
using fem::ScalarField;
using fem::TensorQuadField;
using fem::Vec3;
using fem::VectorField;

struct DnsConfig {
    GeometrySpec geometry;
    /// Re, Fr, S, g, k, lengths and tol; `n` is unused (the DNS mesh follows eps).
    macro::MacroConfig flow;
    int elements_per_cell = 16;
};

/// Fine-scale state for eps = 1/m on the box, m cells per unit length.
struct DnsState {
    double eps = 1.0;
    int cells_per_unit = 1;
    std::shared_ptr<const PeriodicMesh> mesh;
    MaterialField material;
    ScalarField phi;
    VectorField u;
    ScalarField p; // zero on solid elements
    std::vector<Vec> translation;
    std::vector<Vec> rotation;
    std::vector<Point> center;
    fem::SolveStats potential_stats;
    fem::SolveStats flow_stats;
    double energy_a = 0.0;
    double energy_c = 0.0;
    double energy_pressure_load = 0.0;
    double energy_load = 0.0;
    double energy_defect = 0.0;
    /// max over rigid nodes of |u - (U + R x (x - C))|.
    double rigid_defect = 0.0;
};

/// Box mesh resolving eps = 1/m with `elements_per_cell` elements per cell axis.
/// Throws UnderResolved below 8 elements per cell axis.
std::shared_ptr<const PeriodicMesh> build_dns_mesh(int dim, const Point& lengths, int cells_per_unit,
                                                   int elements_per_cell);

/// Zero-mean phi^eps with -div[mu(x/eps) grad phi] = 0 and the flux boundary condition.
ScalarField solve_dns_potential(std::shared_ptr<const PeriodicMesh> mesh, const MaterialField& material,
                                const macro::FluxSpec& k, double tol, fem::SolveStats* stats = nullptr);

/// T = S mu (grad phi x grad phi - 1/2 |grad phi|^2 I) at Gauss points
/// (`gauss_per_axis` per axis).
TensorQuadField maxwell_stress(const ScalarField& phi, const MaterialField& material, double S,
                               int gauss_per_axis = 2);

/// Single-point Maxwell stress S mu (g x g - 1/2 |g|^2 I).
Mat3 maxwell_stress_at(const Vec3& grad_phi, double mu, double S, int dim);

/// Rigid-particle Stokes flow with right-hand side
/// (1/Fr^2) int_f g . v - int_f T(phi) : D(v).
void solve_dns_flow(DnsState& state, const DnsConfig& config);

/// Potential then flow on the eps = 1/m mesh.
DnsState solve_dns(int dim, int cells_per_unit, const DnsConfig& config);

/// Smooth test functions for the weak pressure diagnostics.
constexpr int kBasketSize = 5;
double basket_function(int index, const Point& x);

struct CorrectorEntry {
    double eps = 0.0;
    int cells_per_unit = 0;
    int resolution = 0;
    /// |grad phi^eps - grad phi0 - grad_y phi1|_{L2}
    double potential = 0.0;
    /// same with phi1 dropped
    double potential_ablation = 0.0;
    /// |D(u^eps) - D(u0) - D_y(u1)|_{L2}
    double velocity = 0.0;
    double velocity_ablation = 0.0;
    /// |T(phi^eps) - T0|_{L1} and _{L2}
    double stress_gap_l1 = 0.0;
    double stress_gap_l2 = 0.0;
    /// int (p^eps - pi0) psi_k
    std::array<double, kBasketSize> weak_pressure{};
    double grad_phi_l2 = 0.0;
    double velocity_h1 = 0.0;
    double pressure_l2 = 0.0;
    double energy_defect = 0.0;
    double rigid_defect = 0.0;
    double solid_pressure_max = 0.0;
    int potential_iterations = 0;
    int flow_iterations = 0;

    double apriori() const { return velocity_h1 + pressure_l2; }
};

struct CorrectorReport {
    std::vector<CorrectorEntry> entries;
    double macro_energy_defect = 0.0;
    double tol = 0.0;
};

/// Norms of the first-order corrector errors on the DNS mesh of every eps =
/// 1/m, integrated with 3-point Gauss per axis.
CorrectorEntry corrector_norms(const DnsState& dns, const macro::ReconstructedFields& fields);

CorrectorReport corrector_study(const std::vector<int>& cells_per_unit, const DnsConfig& config,
                                std::shared_ptr<const cell::CellSolutionSet> cells,
                                std::shared_ptr<const macro::MacroState> macro);

} // namespace maghom::dns
