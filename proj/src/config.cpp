#include "maghom/config.hpp"

#include "maghom/error.hpp"
#include "maghom/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace maghom {

using nlohmann::json;

std::string to_string(Command command) {
    switch (command) {
    case Command::Cell: return "cell";
    case Command::Macro: return "macro";
    case Command::Dns: return "dns";
    case Command::Verify: return "verify";
    }
    return "cell";
}

Command command_from_string(const std::string& name) {
    if (name == "cell") return Command::Cell;
    if (name == "macro") return Command::Macro;
    if (name == "dns") return Command::Dns;
    if (name == "verify") return Command::Verify;
    throw ValidationError("unknown command '" + name + "' (expected cell, macro, dns or verify)");
}

bool RunConfig::operator==(const RunConfig& other) const { return to_json(*this) == to_json(other); }

namespace {

json vec_json(const fem::Vec3& v, int d) {
    json out = json::array();
    for (int k = 0; k < d; ++k) out.push_back(v(k));
    return out;
}

json point_json(const Point& p, int d) {
    json out = json::array();
    for (int k = 0; k < d; ++k) out.push_back(p[k]);
    return out;
}

std::string solver_name(fem::SaddleMethod m) { return m == fem::SaddleMethod::Direct ? "direct" : "minres"; }

fem::SaddleMethod solver_from_string(const std::string& name, const std::string& field) {
    if (name == "minres") return fem::SaddleMethod::Minres;
    if (name == "direct") return fem::SaddleMethod::Direct;
    throw ValidationError(field + ": unknown solver '" + name + "' (expected minres or direct)");
}

/// Typed access to a JSON object that rejects unknown keys.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ParseError(where() + " must be an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key) && !node_.at(key).is_null();
    }

    const json& at(const std::string& key) { return node_.at(key); }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number()) throw ParseError(field(key) + " must be a number");
        return v.get<double>();
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_integer()) throw ParseError(field(key) + " must be an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_boolean()) throw ParseError(field(key) + " must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string()) throw ParseError(field(key) + " must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = node_.at(key);
        if (!v.is_array()) throw ParseError(field(key) + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ParseError(field(key) + " must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError("unknown field '" + field(it.key()) + "'");
    }

private:
    std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }

    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

fem::Vec3 read_vec(Reader& r, const std::string& key, int d, const fem::Vec3& fallback) {
    if (!r.has(key)) return fallback;
    const auto v = r.numbers(key);
    if (static_cast<int>(v.size()) != d)
        throw ValidationError(r.field(key) + " must have " + std::to_string(d) + " components");
    fem::Vec3 out = fem::Vec3::Zero();
    for (int k = 0; k < d; ++k) out(k) = v[k];
    return out;
}

Point read_point(Reader& r, const std::string& key, int d, const Point& fallback) {
    const fem::Vec3 v = read_vec(r, key, d, fem::Vec3(fallback[0], fallback[1], fallback[2]));
    Point out = fallback;
    for (int k = 0; k < d; ++k) out[k] = v(k);
    return out;
}

void read_geometry(Reader& top, RunConfig& c) {
    GeometrySpec& g = c.geometry;
    if (top.has("mu")) {
        const json& mu = top.at("mu");
        if (mu.is_number()) {
            g.mu_primary = g.mu_secondary = mu.get<double>();
        } else {
            const auto v = top.numbers("mu");
            if (v.size() != 2) throw ValidationError("mu must be a number or a pair");
            g.mu_primary = v[0];
            g.mu_secondary = v[1];
        }
    }
    if (!top.has("geometry")) return;
    Reader r(top.at("geometry"), "geometry");
    g.shape = shape_from_string(r.string("shape", "none"));
    if (r.has("mu")) {
        const json& mu = r.at("mu");
        if (mu.is_number()) {
            g.mu_primary = g.mu_secondary = mu.get<double>();
        } else {
            const auto v = r.numbers("mu");
            if (v.size() != 2) throw ValidationError("geometry.mu must be a number or a pair");
            g.mu_primary = v[0];
            g.mu_secondary = v[1];
        }
    }
    g.radius = r.number("radius", g.radius);
    g.center = read_point(r, "center", c.dim, g.center);
    g.axis = r.integer("axis", g.axis + 1) - 1;
    g.split = r.number("split", g.split);
    if (r.has("contrast")) g.contrast = r.number("contrast", 1.0);
    r.finish();
}

void read_cell(Reader& top, RunConfig& c, bool& n_given) {
    if (!top.has("cell")) return;
    Reader r(top.at("cell"), "cell");
    if (r.has("n")) {
        c.cell_n = r.integer("n", c.cell_n);
        n_given = true;
    }
    c.cell.tol = r.number("tol", c.cell.tol);
    c.cell.rigid_mode = cell::rigid_mode_from_string(r.string("rigid_mode", to_string(c.cell.rigid_mode)));
    c.cell.penalty_factor = r.number("penalty_factor", c.cell.penalty_factor);
    c.cell.method = solver_from_string(r.string("solver", solver_name(c.cell.method)), "cell.solver");
    r.finish();
}

void read_flux(Reader& parent, macro::FluxSpec& k, int d) {
    if (!parent.has("k")) return;
    Reader r(parent.at("k"), "macro.k");
    k.kind = macro::flux_kind_from_string(r.string("kind", to_string(k.kind)));
    k.vector = read_vec(r, "vector", d, k.vector);
    k.amplitude = r.number("amplitude", k.amplitude);
    if (r.has("gradient")) {
        const json& rows = r.at("gradient");
        if (!rows.is_array() || static_cast<int>(rows.size()) != d)
            throw ValidationError("macro.k.gradient must be a " + std::to_string(d) + "x" + std::to_string(d) +
                                  " array");
        k.gradient.setZero();
        for (int i = 0; i < d; ++i) {
            if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != d)
                throw ValidationError("macro.k.gradient must be square");
            for (int j = 0; j < d; ++j) {
                if (!rows[i][j].is_number()) throw ParseError("macro.k.gradient entries must be numbers");
                k.gradient(i, j) = rows[i][j].get<double>();
            }
        }
    }
    r.finish();
}

void read_macro(Reader& top, RunConfig& c, bool& n_given) {
    if (!top.has("macro")) return;
    Reader r(top.at("macro"), "macro");
    auto& m = c.macro;
    m.Re = r.number("Re", m.Re);
    m.Fr = r.number("Fr", m.Fr);
    m.S = r.number("S", m.S);
    m.g = read_vec(r, "g", c.dim, m.g);
    read_flux(r, m.k, c.dim);
    m.lengths = read_point(r, "lengths", c.dim, m.lengths);
    if (r.has("n")) {
        m.n = r.integer("n", m.n);
        n_given = true;
    }
    m.tol = r.number("tol", m.tol);
    m.method = solver_from_string(r.string("solver", solver_name(m.method)), "macro.solver");
    r.finish();
}

void read_dns(Reader& top, RunConfig& c) {
    if (!top.has("dns")) return;
    Reader r(top.at("dns"), "dns");
    if (r.has("eps")) {
        c.cells_per_unit.clear();
        for (double eps : r.numbers("eps")) {
            if (!(eps > 0.0)) throw ValidationError("dns.eps entries must be positive");
            const double m = 1.0 / eps;
            if (std::abs(m - std::round(m)) > 1e-9) throw ValidationError("dns.eps entries must be 1/m for integer m");
            c.cells_per_unit.push_back(static_cast<int>(std::round(m)));
        }
    }
    c.elements_per_cell = r.integer("elements_per_cell", c.elements_per_cell);
    r.finish();
}

void read_output(Reader& top, RunConfig& c) {
    if (!top.has("output")) return;
    Reader r(top.at("output"), "output");
    c.write_vtk = r.boolean("vtk", c.write_vtk);
    c.sample_resolution = r.integer("sample_resolution", c.sample_resolution);
    r.finish();
}

void validate(const RunConfig& c) {
    if (c.dim != 2 && c.dim != 3) throw ValidationError("dim must be 2 or 3");
    if (c.cell_n < 4) throw ValidationError("cell.n must be at least 4");
    if (!(c.cell.tol > 0.0 && c.cell.tol <= 1e-4)) throw ValidationError("cell.tol must lie in (0, 1e-4]");
    if (!(c.cell.penalty_factor > 0.0)) throw ValidationError("cell.penalty_factor must be positive");
    const auto& m = c.macro;
    if (!(m.Re > 0.0)) throw ValidationError("Re must be positive");
    if (!(m.Fr > 0.0)) throw ValidationError("Fr must be positive");
    if (!(m.S >= 0.0)) throw ValidationError("S must be non-negative");
    for (int k = 0; k < c.dim; ++k)
        if (!(m.lengths[k] > 0.0)) throw ValidationError("macro.lengths must be positive");
    if (m.n < 4) throw ValidationError("macro.n must be at least 4");
    if (!(m.tol > 0.0 && m.tol <= 1e-4)) throw ValidationError("macro.tol must lie in (0, 1e-4]");
    if (c.cells_per_unit.empty()) throw ValidationError("dns.eps must not be empty");
    for (std::size_t a = 0; a < c.cells_per_unit.size(); ++a) {
        if (c.cells_per_unit[a] < 1) throw ValidationError("dns.eps entries must not exceed 1");
        if (a > 0 && c.cells_per_unit[a] <= c.cells_per_unit[a - 1])
            throw ValidationError("dns.eps must be strictly decreasing");
    }
    if (c.elements_per_cell < 1) throw ValidationError("dns.elements_per_cell must be positive");
    if (c.sample_resolution < 0) throw ValidationError("output.sample_resolution must be non-negative");
    if (c.geometry.shape == GeometrySpec::Shape::Layered && (c.geometry.axis < 0 || c.geometry.axis >= c.dim))
        throw ValidationError("geometry.axis must be between 1 and dim");
    if (!(c.geometry.mu_primary > 0.0) || !(c.geometry.mu_secondary > 0.0))
        throw ValidationError("permeabilities must be positive");
    if (c.geometry.contrast && !(*c.geometry.contrast >= 1.0)) throw ValidationError("contrast must be >= 1");
}

std::string line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

json to_json(const RunConfig& c) {
    const int d = c.dim;
    const auto& g = c.geometry;
    json geometry = {{"shape", to_string(g.shape)},
                     {"mu", {g.mu_primary, g.mu_secondary}},
                     {"radius", g.radius},
                     {"center", point_json(g.center, d)},
                     {"axis", g.axis + 1},
                     {"split", g.split},
                     {"contrast", g.contrast ? json(*g.contrast) : json(nullptr)}};
    json cell = {{"n", c.cell_n},
                 {"tol", c.cell.tol},
                 {"rigid_mode", to_string(c.cell.rigid_mode)},
                 {"penalty_factor", c.cell.penalty_factor},
                 {"solver", solver_name(c.cell.method)}};
    const auto& m = c.macro;
    json gradient = json::array();
    for (int i = 0; i < d; ++i) {
        json row = json::array();
        for (int j = 0; j < d; ++j) row.push_back(m.k.gradient(i, j));
        gradient.push_back(row);
    }
    json k = {{"kind", to_string(m.k.kind)},
              {"vector", vec_json(m.k.vector, d)},
              {"amplitude", m.k.amplitude},
              {"gradient", gradient}};
    json macro = {{"Re", m.Re},
                  {"Fr", m.Fr},
                  {"S", m.S},
                  {"g", vec_json(m.g, d)},
                  {"k", k},
                  {"lengths", point_json(m.lengths, d)},
                  {"n", m.n},
                  {"tol", m.tol},
                  {"solver", solver_name(m.method)}};
    json eps = json::array();
    for (int cells : c.cells_per_unit) eps.push_back(1.0 / cells);
    json dns = {{"eps", eps}, {"elements_per_cell", c.elements_per_cell}};
    json output = {{"vtk", c.write_vtk}, {"sample_resolution", c.sample_resolution}};
    return {{"command", to_string(c.command)}, {"dim", d},     {"geometry", geometry}, {"cell", cell},
            {"macro", macro},                  {"dns", dns},   {"output", output}};
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": " + line_column(text, e.byte > 0 ? e.byte - 1 : 0) + ": invalid JSON (" +
                         e.what() + ")");
    }
    RunConfig c;
    Reader top(root, "");
    if (!top.has("command")) throw ValidationError("missing required field 'command'");
    c.command = command_from_string(top.string("command", "cell"));
    c.dim = top.integer("dim", c.dim);
    if (c.dim != 2 && c.dim != 3) throw ValidationError("dim must be 2 or 3");
    read_geometry(top, c);
    bool cell_n_given = false;
    read_cell(top, c, cell_n_given);
    bool n_given = false;
    read_macro(top, c, n_given);
    read_dns(top, c);
    read_output(top, c);
    top.finish();
    if (!n_given && (c.command == Command::Verify || c.command == Command::Dns)) {
        // macro mesh as fine as the finest DNS mesh
        c.macro.n = static_cast<int>(std::lround(c.macro.lengths[0] * c.cells_per_unit.back())) * c.elements_per_cell;
    }
    // cell mesh matches the DNS cell discretization
    if (!cell_n_given && (c.command == Command::Verify || c.command == Command::Dns)) c.cell_n = c.elements_per_cell;
    validate(c);
    return c;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string config_hash(const RunConfig& config) { return io::sha256_hex(to_json(config).dump()); }

dns::DnsConfig dns_config(const RunConfig& config) {
    dns::DnsConfig out;
    out.geometry = config.geometry;
    out.flow = config.macro;
    out.elements_per_cell = config.elements_per_cell;
    return out;
}

} // namespace maghom
