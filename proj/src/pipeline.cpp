#include "maghom/pipeline.hpp"

#include "maghom/cell.hpp"
#include "maghom/dns.hpp"
#include "maghom/io.hpp"
#include "maghom/macro.hpp"
#include "maghom/report.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace maghom::pipeline {

using nlohmann::json;

namespace {

/// Contrast above which the small-oscillation condition is flagged.
constexpr double kLargeContrast = 10.0;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
    return out.str();
}

/// Timestamped lines accumulated in memory and flushed to run.log.
class RunLog {
public:
    RunLog(std::string path, std::ostream* mirror) : path_(std::move(path)), mirror_(mirror) {}

    void line(const std::string& text) {
        const std::string entry = utc_timestamp() + "  " + text + "\n";
        buffer_ += entry;
        if (mirror_) *mirror_ << text << '\n' << std::flush;
        io::write_text(path_, buffer_);
    }

    template <class Fn>
    auto stage(const std::string& name, Fn&& fn) {
        line("begin " + name);
        const auto start = std::chrono::steady_clock::now();
        auto result = fn();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ostringstream msg;
        msg << "end   " << name << " (" << std::fixed << std::setprecision(3) << secs << " s)";
        line(msg.str());
        return result;
    }

private:
    std::string path_;
    std::ostream* mirror_;
    std::string buffer_;
};

class Outputs {
public:
    Outputs(std::string dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {}

    const std::string& hash() const noexcept { return hash_; }
    std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

    void text(const std::string& name, const std::string& content) {
        io::write_text(path(name), content);
        artifacts_.push_back(name);
    }
    void json_file(const std::string& name, json value) {
        value["config_hash"] = hash_;
        io::write_json(path(name), value);
        artifacts_.push_back(name);
    }

    std::vector<std::string> artifacts() const { return artifacts_; }

private:
    std::string dir_;
    std::string hash_;
    std::vector<std::string> artifacts_;
};

std::vector<std::string> warnings(const RunConfig& config) {
    std::vector<std::string> out;
    const double contrast = config.geometry.resolved_contrast();
    if (contrast > kLargeContrast) {
        std::ostringstream msg;
        msg << "contrast " << contrast << " is large; the small-oscillation condition on mu is not guaranteed";
        out.push_back(msg.str());
    }
    return out;
}

double mean_mu(const cell::CellSolutionSet& cells) {
    double sum = 0.0;
    for (double mu : cells.material.mu) sum += mu;
    return sum / static_cast<double>(cells.material.mu.size());
}

json cell_stats_json(const cell::CellSolutionSet& cells) {
    json scalar = json::array(), viscous = json::array(), magnetic = json::array();
    for (const auto& s : cells.scalar) scalar.push_back(report::solve_stats_json(s.stats));
    for (const auto& s : cells.viscous) viscous.push_back(report::solve_stats_json(s.stats));
    for (const auto& s : cells.magnetic) magnetic.push_back(report::solve_stats_json(s.stats));
    return {{"scalar", scalar}, {"viscous", viscous}, {"magnetic", magnetic}};
}

json cell_report(const RunConfig& config, const cell::CellResult& result) {
    const auto checks = report::check_tensors(result.tensors, mean_mu(result.cells));
    json warn = json::array();
    for (const auto& w : warnings(config)) warn.push_back(w);
    return {{"command", to_string(config.command)},
            {"tensors", report::tensors_json(result.tensors)},
            {"checks", report::checks_json(checks)},
            {"cell_solves", cell_stats_json(result.cells)},
            {"conventions", report::conventions_json()},
            {"warnings", warn}};
}

json macro_json(const macro::MacroState& m) {
    return {{"resolution", m.mesh->resolution()},
            {"potential_solve", report::solve_stats_json(m.potential_stats)},
            {"flow_solve", report::solve_stats_json(m.flow_stats)},
            {"boundary_flux", m.boundary_flux},
            {"energy_defect", m.energy_defect}};
}

json vectors_json(const std::vector<Vec>& vs) {
    json out = json::array();
    for (const auto& v : vs) {
        json row = json::array();
        for (Eigen::Index k = 0; k < v.size(); ++k) row.push_back(v(k));
        out.push_back(row);
    }
    return out;
}

json dns_json(const dns::DnsState& s) {
    json centers = json::array();
    for (const auto& c : s.center) {
        json row = json::array();
        for (int k = 0; k < s.mesh->dim(); ++k) row.push_back(c[k]);
        centers.push_back(row);
    }
    return {{"eps", s.eps},
            {"cells_per_unit", s.cells_per_unit},
            {"resolution", s.mesh->resolution()},
            {"potential_solve", report::solve_stats_json(s.potential_stats)},
            {"flow_solve", report::solve_stats_json(s.flow_stats)},
            {"energy_a", s.energy_a},
            {"energy_c", s.energy_c},
            {"energy_pressure_load", s.energy_pressure_load},
            {"energy_load", s.energy_load},
            {"energy_defect", s.energy_defect},
            {"rigid_defect", s.rigid_defect},
            {"particle_centers", centers},
            {"particle_translations", vectors_json(s.translation)},
            {"particle_rotations", vectors_json(s.rotation)}};
}

std::string macro_vtk(const macro::MacroState& m, const std::string& hash) {
    return io::vtk_structured(*m.mesh, "macro fields config_hash " + hash,
                              {{"phi0", io::nodal_values(m.phi0)}, {"pi0", io::nodal_values(m.pi0)}},
                              {{"u0", io::nodal_values(m.u0)}},
                              {{"effective_maxwell_stress", io::element_average(m.maxwell)}});
}

std::string reconstructed_vtk(const RunConfig& config, std::shared_ptr<const macro::MacroState> m,
                              std::shared_ptr<const cell::CellSolutionSet> cells, const std::string& hash) {
    const int d = config.dim;
    const double eps = 1.0 / config.cells_per_unit.back();
    const PeriodicMesh grid = build_box_mesh(d, config.macro.lengths, config.sample_resolution);
    const macro::ReconstructedFields fields(m, cells, eps);
    const int nn = grid.num_nodes();
    std::vector<double> p0(nn), phi1(nn);
    std::vector<fem::Vec3> grad_phi(nn), u(nn);
    for (int node = 0; node < nn; ++node) {
        const Point x = grid.node_coords(node);
        const auto s = fields.at(x);
        p0[node] = s.p0;
        phi1[node] = s.phi1;
        grad_phi[node] = s.grad_phi0 + s.grad_y_phi1;
        u[node] = m->u0.value_at(x) + eps * s.u1;
    }
    std::ostringstream title;
    title << "reconstructed fields eps " << io::format_double(eps) << " config_hash " << hash;
    return io::vtk_structured(grid, title.str(), {{"p0", p0}, {"phi1", phi1}},
                              {{"grad_phi_first_order", grad_phi}, {"u_first_order", u}}, {});
}

std::string dns_vtk(const dns::DnsState& s, double S, const std::string& hash) {
    std::ostringstream title;
    title << "dns fields eps " << io::format_double(s.eps) << " config_hash " << hash;
    return io::vtk_structured(*s.mesh, title.str(), {{"phi", io::nodal_values(s.phi)}, {"p", io::nodal_values(s.p)}},
                              {{"u", io::nodal_values(s.u)}},
                              {{"maxwell_stress", io::element_average(dns::maxwell_stress(s.phi, s.material, S))}},
                              {{"mu", s.material.mu}});
}

} // namespace

int exit_code(const std::string& name) {
    if (name == "IoError") return 4;
    if (name == "NoConvergence" || name == "FormulaMismatch") return 3;
    if (name == "ParseError" || name == "ValidationError" || name == "InvalidResolution" ||
        name == "InvalidGeometry" || name == "SolidTouchesBoundary" || name == "ContrastViolation" ||
        name == "InconsistentConstraints" || name == "IncompatibleFlux" || name == "NotSPD" ||
        name == "UnderResolved")
        return 2;
    return 1;
}

json error_json(const std::string& name, const std::string& message) {
    return {{"error", name}, {"message", message}, {"exit_code", exit_code(name)}};
}

RunSummary run(const RunConfig& config, const RunOptions& options) {
    const std::string hash = config_hash(config);
    Outputs out(options.out_dir, hash);
    RunLog log(out.path("run.log"), options.progress);
    log.line("maghom " + to_string(config.command) + " config_hash " + hash);
    log.line("threads requested " + std::to_string(options.threads) + ", running sequentially");
    for (const auto& w : warnings(config)) log.line("warning: " + w);

    out.json_file("config_echo.json", {{"config", to_json(config)}});

    try {
        const bool needs_cells = config.command != Command::Dns;
        std::shared_ptr<const cell::CellSolutionSet> cells;
        std::shared_ptr<const macro::MacroState> macro_state;
        json report_doc;

        if (needs_cells) {
            auto result = log.stage("cell problems (n=" + std::to_string(config.cell_n) + ")", [&] {
                return cell::run_cell_problems(config.dim, config.cell_n, config.geometry, config.cell);
            });
            out.text("effective_tensors.csv", io::tensors_csv(result.tensors, hash));
            report_doc = cell_report(config, result);
            auto tensors = result.tensors;
            cells = std::make_shared<const cell::CellSolutionSet>(std::move(result.cells));

            if (config.command == Command::Macro || config.command == Command::Verify) {
                macro_state = log.stage("macro problem (n=" + std::to_string(config.macro.n) + ")", [&] {
                    return std::make_shared<const macro::MacroState>(macro::solve_macro(tensors, config.macro));
                });
                report_doc["macro"] = macro_json(*macro_state);
                if (config.write_vtk) out.text("macro_fields.vtk", macro_vtk(*macro_state, hash));
                if (config.sample_resolution > 0)
                    out.text("reconstructed_fields.vtk", reconstructed_vtk(config, macro_state, cells, hash));
            }
        }

        const dns::DnsConfig dcfg = dns_config(config);
        if (config.command == Command::Dns) {
            json runs = json::array();
            json warn = json::array();
            for (const auto& w : warnings(config)) warn.push_back(w);
            for (int m : config.cells_per_unit) {
                const auto state = log.stage("dns eps=1/" + std::to_string(m), [&] {
                    return dns::solve_dns(config.dim, m, dcfg);
                });
                runs.push_back(dns_json(state));
                if (config.write_vtk)
                    out.text("dns_fields_m" + std::to_string(m) + ".vtk", dns_vtk(state, config.macro.S, hash));
            }
            report_doc = {{"command", "dns"}, {"dns", runs}, {"conventions", report::conventions_json()},
                          {"warnings", warn}};
        }

        if (config.command == Command::Verify) {
            dns::CorrectorReport study;
            study.macro_energy_defect = macro_state->energy_defect;
            study.tol = config.macro.tol;
            for (int m : config.cells_per_unit) {
                auto entry = log.stage("dns + corrector norms eps=1/" + std::to_string(m), [&] {
                    const auto state = dns::solve_dns(config.dim, m, dcfg);
                    const macro::ReconstructedFields fields(macro_state, cells, state.eps);
                    return dns::corrector_norms(state, fields);
                });
                study.entries.push_back(entry);
            }
            out.json_file("corrector_report.json", report::corrector_json(study));
            out.text("corrector_report.csv", report::corrector_csv(study, hash));
        }

        out.json_file("report.json", report_doc);
    } catch (const Error& e) {
        log.line("error " + e.name() + ": " + e.what());
        throw;
    }
    log.line("done");
    return {hash, out.artifacts()};
}

} // namespace maghom::pipeline
