#pragma once

#include "maghom/cell.hpp"
#include "maghom/dns.hpp"
#include "maghom/macro.hpp"

#include <json.hpp>

namespace maghom::report {

/// Invariant checks on a set of effective tensors.
struct TensorChecks {
    double mu_symmetry = 0.0;
    double mu_min_eigenvalue = 0.0;
    double mu_lower_bound = 0.0; // 1 / Lambda
    double voigt_excess = 0.0;   // max_k mu_eff_kk - <mu>
    double N_major = 0.0;
    double N_minor_left = 0.0;
    double N_minor_right = 0.0;
    double N_minor_both = 0.0;
    double legendre_hadamard_min = 0.0;
    double B_trace_max = 0.0; // max_i |tr B^ii|
};

/// `samples` random unit pairs (zeta, eta) drawn from a fixed-seed generator.
double legendre_hadamard_min(const Tensor4& N, int samples = 1000, unsigned seed = 12345u);

/// Symmetry defects measured on the un-symmetrized energy assembly.
TensorChecks check_tensors(const cell::EffectiveTensors& t, double mean_mu);

nlohmann::json tensors_json(const cell::EffectiveTensors& t);
nlohmann::json checks_json(const TensorChecks& c);
nlohmann::json conventions_json();

/// Pass/fail verdicts on a corrector study. Thresholds are engineering
/// choices; the limits themselves carry no rate.
struct CorrectorVerdict {
    bool potential_decreasing = false;
    bool velocity_decreasing = false;
    bool ablation_stalls = false;
    bool stress_gap_decreasing = false;
    bool apriori_bounded = false;
    bool energy_identity = false;
    double min_potential_ratio = 0.0;
    double min_velocity_ratio = 0.0;
    double ablation_fraction = 0.0;
    double apriori_spread = 0.0;
    double max_energy_defect = 0.0;
};

CorrectorVerdict judge(const dns::CorrectorReport& report, double ratio = 1.3);

nlohmann::json corrector_json(const dns::CorrectorReport& report);
std::string corrector_csv(const dns::CorrectorReport& report, const std::string& hash);

nlohmann::json solve_stats_json(const fem::SolveStats& s);

} // namespace maghom::report
