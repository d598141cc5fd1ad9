#pragma once

#include "maghom/cell.hpp"
#include "maghom/fem/stokes.hpp"

#include <memory>
#include <string>

namespace maghom::macro {

using fem::Mat3;
using fem::ScalarField;
using fem::TensorQuadField;
using fem::Vec3;
using fem::VectorField;

/// Boundary flux field k. Built-ins are exactly divergence-free with zero net
/// flux through the box boundary; `Affine` (k = vector + gradient x) is for
/// user-supplied fields and need not be.
struct FluxSpec {
    enum class Kind { Constant, Trigonometric, Affine };

    Kind kind = Kind::Constant;
    Vec3 vector = Vec3::UnitX();
    double amplitude = 1.0;
    Mat3 gradient = Mat3::Zero();

    /// k at x on the box prod (0, L_k).
    Vec3 evaluate(const Point& x, const Point& lengths) const;
};

std::string to_string(FluxSpec::Kind kind);
FluxSpec::Kind flux_kind_from_string(const std::string& name);

struct MacroConfig {
    double Re = 1.0;
    double Fr = 1.0;
    double S = 0.0;
    Vec3 g = Vec3::Zero();
    FluxSpec k;
    Point lengths{1.0, 1.0, 1.0};
    int n = 32;
    double tol = 1e-8;
    fem::SaddleMethod method = fem::SaddleMethod::Minres;
};

/// Discrete net flux int k . n over the box boundary; throws IncompatibleFlux
/// when it exceeds 1e-10 max|k| |boundary|.
double check_flux(const PeriodicMesh& mesh, const FluxSpec& k);

/// Zero-mean solution of the Neumann problem with stiffness `stiffness` and
/// boundary flux k . n.
ScalarField solve_neumann_potential(std::shared_ptr<const PeriodicMesh> mesh, const fem::SparseMatrix& stiffness,
                                    const FluxSpec& k, double tol, fem::SolveStats* stats = nullptr);

struct PotentialResult {
    ScalarField phi;
    fem::SolveStats stats;
    double boundary_flux = 0.0;
};

/// Zero-mean phi0 with -div(mu_eff grad phi0) = 0 and (mu_eff grad phi0) . n = k . n.
/// Throws NotSPD or IncompatibleFlux.
PotentialResult solve_macro_potential(std::shared_ptr<const PeriodicMesh> mesh, const Mat& mu_eff,
                                      const MacroConfig& config);

/// Effective Maxwell stress S B~^ij d_i phi0 d_j phi0 at the 2-point Gauss points.
TensorQuadField effective_maxwell_stress(const ScalarField& phi0, const std::vector<Mat>& B_sym, double S);

struct FlowResult {
    VectorField u;
    ScalarField pi;
    TensorQuadField maxwell;
    fem::StokesSolution solve;
};

/// -div[(2/Re) N:D(u0) - pi0 I + S B~^ij d_i phi0 d_j phi0] = g / Fr^2, div u0 = 0,
/// u0 = 0 on the boundary.
FlowResult solve_macro_flow(std::shared_ptr<const PeriodicMesh> mesh, const Tensor4& N, const std::vector<Mat>& B_sym,
                            const ScalarField& phi0, const MacroConfig& config);

struct MacroState {
    std::shared_ptr<const PeriodicMesh> mesh;
    MacroConfig config;
    ScalarField phi0;
    VectorField u0;
    ScalarField pi0;
    TensorQuadField maxwell;
    fem::SolveStats potential_stats;
    fem::SolveStats flow_stats;
    double boundary_flux = 0.0;
    double energy_defect = 0.0;
};

MacroState solve_macro(const cell::EffectiveTensors& tensors, const MacroConfig& config);

/// First-order two-scale fields evaluated at (x, y = x/eps mod 1).
class ReconstructedFields {
public:
    ReconstructedFields(std::shared_ptr<const MacroState> macro, std::shared_ptr<const cell::CellSolutionSet> cells,
                        double eps);

    double eps() const noexcept { return eps_; }
    double S() const noexcept { return macro_->config.S; }

    struct Sample {
        Vec3 grad_phi0;
        Mat3 strain0;     // deviatoric D(u0)
        Mat3 strain0_full;
        double pi0 = 0.0;
        double phi1 = 0.0;
        Vec3 grad_y_phi1; // d_i phi0 grad_y omega^i
        Vec3 u1;
        Mat3 strain_y_u1; // D_y(u1)
        double p0 = 0.0;
        Mat3 T0;
    };

    Sample at(const Point& x) const;

private:
    std::shared_ptr<const MacroState> macro_;
    std::shared_ptr<const cell::CellSolutionSet> cells_;
    double eps_;
};

} // namespace maghom::macro
