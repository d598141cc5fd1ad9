#include "maghom/report.hpp"

#include "maghom/io.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

namespace maghom::report {

using nlohmann::json;

namespace {

json matrix_json(const Mat& m, int d) {
    json rows = json::array();
    for (int i = 0; i < d; ++i) {
        json row = json::array();
        for (int j = 0; j < d; ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json tensor4_json(const Tensor4& t) {
    const int d = t.dim();
    json out = json::array();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Mat block(d, d);
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) block(m, n) = t(i, j, m, n);
            out.push_back(matrix_json(block, d));
        }
    return out;
}

json matrices_json(const std::vector<Mat>& ms, int d) {
    json out = json::array();
    for (const auto& m : ms) out.push_back(matrix_json(m, d));
    return out;
}

} // namespace

double legendre_hadamard_min(const Tensor4& N, int samples, unsigned seed) {
    const int d = N.dim();
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto unit = [&] {
        Vec v(d);
        do {
            for (int k = 0; k < d; ++k) v(k) = normal(rng);
        } while (v.norm() < 1e-12);
        return Vec(v / v.norm());
    };
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const Vec z = unit(), eta = unit();
        double v = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int m = 0; m < d; ++m)
                    for (int n = 0; n < d; ++n) v += N(i, j, m, n) * z(i) * z(m) * eta(j) * eta(n);
        best = std::min(best, v);
    }
    return best;
}

TensorChecks check_tensors(const cell::EffectiveTensors& t, double mean_mu) {
    const int d = t.dim;
    TensorChecks c;
    c.mu_symmetry = (t.mu_eff - t.mu_eff.transpose()).cwiseAbs().maxCoeff();
    const Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (t.mu_eff + t.mu_eff.transpose()));
    c.mu_min_eigenvalue = eig.eigenvalues().minCoeff();
    c.mu_lower_bound = 1.0 / t.contrast;
    c.voigt_excess = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < d; ++k) c.voigt_excess = std::max(c.voigt_excess, t.mu_eff(k, k) - mean_mu);
    const Tensor4& N = t.N_energy;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) {
                    const double v = N(i, j, m, n);
                    c.N_major = std::max(c.N_major, std::abs(v - N(m, n, i, j)));
                    c.N_minor_left = std::max(c.N_minor_left, std::abs(v - N(j, i, m, n)));
                    c.N_minor_right = std::max(c.N_minor_right, std::abs(v - N(i, j, n, m)));
                    c.N_minor_both = std::max(c.N_minor_both, std::abs(v - N(j, i, n, m)));
                }
    c.legendre_hadamard_min = legendre_hadamard_min(t.N);
    for (int i = 0; i < d; ++i) c.B_trace_max = std::max(c.B_trace_max, std::abs(t.B[i * d + i].trace()));
    return c;
}

json tensors_json(const cell::EffectiveTensors& t) {
    const int d = t.dim;
    return {{"dim", d},
            {"mu_eff", matrix_json(t.mu_eff, d)},
            {"mu_eff_linear_form", matrix_json(t.mu_eff_linear, d)},
            {"mu_formula_gap", t.mu_formula_gap},
            {"N", tensor4_json(t.N)},
            {"N_energy", tensor4_json(t.N_energy)},
            {"N_direct", tensor4_json(t.N_direct)},
            {"N_strain_average", tensor4_json(t.N_strain_average)},
            {"N_formula_gap", t.N_formula_gap},
            {"N_asymmetry", t.N_asymmetry},
            {"B", matrices_json(t.B, d)},
            {"B_sym", matrices_json(t.B_sym, d)},
            {"contrast", t.contrast},
            {"solid_fraction", t.solid_fraction},
            {"resolution", t.resolution},
            {"geometry", to_string(t.geometry.shape)},
            {"rigid_mode", to_string(t.options.rigid_mode)}};
}

json checks_json(const TensorChecks& c) {
    return {{"mu_symmetry", c.mu_symmetry},
            {"mu_min_eigenvalue", c.mu_min_eigenvalue},
            {"mu_lower_bound", c.mu_lower_bound},
            {"voigt_excess", c.voigt_excess},
            {"N_major_symmetry", c.N_major},
            {"N_minor_symmetry_left", c.N_minor_left},
            {"N_minor_symmetry_right", c.N_minor_right},
            {"N_minor_symmetry_both", c.N_minor_both},
            {"legendre_hadamard_min", c.legendre_hadamard_min},
            {"B_trace_max", c.B_trace_max}};
}

json conventions_json() {
    return {{"momentum", "-Div[sigma] = g / Fr^2"},
            {"macro_stress", "(2/Re) N:D(u0) - pi0 I + S B_sym^ij d_i phi0 d_j phi0"},
            {"viscous_cell_stress", "D(P - chi) - q I"},
            {"magnetic_cell_stress", "D(xi) + r I + tau"},
            {"pressure_split", "p0 = pi0 + (2/Re) D0_ij q^ij - S d_i phi0 d_j phi0 r^ij"},
            {"velocity_corrector", "u1 = -D0_ij chi^ij + (Re/2) S d_i phi0 d_j phi0 xi^ij"},
            {"viscous_basis", "trace-free P^ij = y_j e_i - delta_ij y / d; N adds delta_ij delta_mn / d"},
            {"energy_identity", "|a(u,u) + c(p,p) + p.g - l(u)| / (|a| + |c| + |p.g| + |l|)"},
            {"stabilization", "0.1 h^2 / (2 viscosity_scale) int (grad p - f) . grad q with f the constant body force"},
            {"pressure_space", "Q1, continuous within each fluid permeability class"},
            {"thresholds", "corrector ratio 1.3 and the 50% ablation stall are engineering choices"}};
}

CorrectorVerdict judge(const dns::CorrectorReport& report, double ratio) {
    CorrectorVerdict v;
    const auto& e = report.entries;
    if (e.size() < 2) return v;
    v.potential_decreasing = v.velocity_decreasing = v.stress_gap_decreasing = true;
    v.min_potential_ratio = v.min_velocity_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < e.size(); ++k) {
        const double rp = e[k].potential > 0.0 ? e[k - 1].potential / e[k].potential
                                               : std::numeric_limits<double>::infinity();
        const double rv = e[k].velocity > 0.0 ? e[k - 1].velocity / e[k].velocity
                                              : std::numeric_limits<double>::infinity();
        v.min_potential_ratio = std::min(v.min_potential_ratio, rp);
        v.min_velocity_ratio = std::min(v.min_velocity_ratio, rv);
        if (!(e[k].potential < e[k - 1].potential && rp >= ratio)) v.potential_decreasing = false;
        if (!(e[k].velocity < e[k - 1].velocity && rv >= ratio)) v.velocity_decreasing = false;
        if (!(e[k].stress_gap_l1 < e[k - 1].stress_gap_l1)) v.stress_gap_decreasing = false;
    }
    v.ablation_fraction = e.front().potential_ablation > 0.0
                              ? e.back().potential_ablation / e.front().potential_ablation
                              : 0.0;
    v.ablation_stalls = v.ablation_fraction > 0.5;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& x : e) {
        lo = std::min(lo, x.apriori());
        hi = std::max(hi, x.apriori());
        v.max_energy_defect = std::max(v.max_energy_defect, x.energy_defect);
    }
    v.max_energy_defect = std::max(v.max_energy_defect, report.macro_energy_defect);
    v.apriori_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    v.apriori_bounded = v.apriori_spread < 2.0;
    v.energy_identity = v.max_energy_defect <= 10.0 * report.tol;
    return v;
}

json corrector_json(const dns::CorrectorReport& report) {
    json entries = json::array();
    for (const auto& e : report.entries) {
        json weak = json::array();
        for (double w : e.weak_pressure) weak.push_back(w);
        entries.push_back({{"eps", e.eps},
                           {"cells_per_unit", e.cells_per_unit},
                           {"resolution", e.resolution},
                           {"potential_corrector", e.potential},
                           {"potential_corrector_ablation", e.potential_ablation},
                           {"velocity_corrector", e.velocity},
                           {"velocity_corrector_ablation", e.velocity_ablation},
                           {"maxwell_gap_l1", e.stress_gap_l1},
                           {"maxwell_gap_l2", e.stress_gap_l2},
                           {"weak_pressure", weak},
                           {"grad_phi_l2", e.grad_phi_l2},
                           {"velocity_h1", e.velocity_h1},
                           {"pressure_l2", e.pressure_l2},
                           {"apriori", e.apriori()},
                           {"energy_defect", e.energy_defect},
                           {"rigid_defect", e.rigid_defect},
                           {"solid_pressure_max", e.solid_pressure_max},
                           {"potential_iterations", e.potential_iterations},
                           {"flow_iterations", e.flow_iterations}});
    }
    const CorrectorVerdict v = judge(report);
    json verdict = {{"potential_decreasing", v.potential_decreasing},
                    {"velocity_decreasing", v.velocity_decreasing},
                    {"ablation_stalls", v.ablation_stalls},
                    {"maxwell_gap_decreasing", v.stress_gap_decreasing},
                    {"apriori_bounded", v.apriori_bounded},
                    {"energy_identity", v.energy_identity},
                    {"min_potential_ratio", std::isfinite(v.min_potential_ratio) ? json(v.min_potential_ratio) : json(nullptr)},
                    {"min_velocity_ratio", std::isfinite(v.min_velocity_ratio) ? json(v.min_velocity_ratio) : json(nullptr)},
                    {"ablation_fraction", v.ablation_fraction},
                    {"apriori_spread", std::isfinite(v.apriori_spread) ? json(v.apriori_spread) : json(nullptr)},
                    {"max_energy_defect", v.max_energy_defect},
                    {"ratio_threshold", 1.3}};
    return {{"entries", entries},
            {"macro_energy_defect", report.macro_energy_defect},
            {"tol", report.tol},
            {"verdict", verdict}};
}

std::string corrector_csv(const dns::CorrectorReport& report, const std::string& hash) {
    std::ostringstream out;
    out << "# config_hash: " << hash << "\n";
    out << "eps,potential,potential_ablation,velocity,velocity_ablation,maxwell_l1,maxwell_l2,apriori,energy_defect";
    for (int k = 0; k < dns::kBasketSize; ++k) out << ",weak_pressure_" << k;
    out << '\n';
    using io::format_double;
    for (const auto& e : report.entries) {
        out << format_double(e.eps) << ',' << format_double(e.potential) << ',' << format_double(e.potential_ablation)
            << ',' << format_double(e.velocity) << ',' << format_double(e.velocity_ablation) << ','
            << format_double(e.stress_gap_l1) << ',' << format_double(e.stress_gap_l2) << ','
            << format_double(e.apriori()) << ',' << format_double(e.energy_defect);
        for (double w : e.weak_pressure) out << ',' << format_double(w);
        out << '\n';
    }
    return out.str();
}

json solve_stats_json(const fem::SolveStats& s) {
    return {{"iterations", s.iterations}, {"relative_residual", s.relative_residual}};
}

} // namespace maghom::report
