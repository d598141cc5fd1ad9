#pragma once

#include "maghom/cell.hpp"
#include "maghom/dns.hpp"
#include "maghom/macro.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace maghom {

enum class Command { Cell, Macro, Dns, Verify };

std::string to_string(Command command);
Command command_from_string(const std::string& name);

struct RunConfig {
    Command command = Command::Cell;
    int dim = 2;
    GeometrySpec geometry;

    int cell_n = 64;
    cell::CellOptions cell;

    macro::MacroConfig macro;

    /// eps = 1 / m for each entry.
    std::vector<int> cells_per_unit{2, 4, 8};
    int elements_per_cell = 16;

    bool write_vtk = true;
    /// Reconstructed-field sampling grid per axis (0 disables the export).
    int sample_resolution = 0;

    bool operator==(const RunConfig& other) const;
};

/// Fully resolved configuration with every default written out.
nlohmann::json to_json(const RunConfig& config);

/// Parses and validates JSON text. `source` names the input in diagnostics.
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
RunConfig parse_config(const std::string& path);

/// SHA-256 (hex) of the canonical echo-back.
std::string config_hash(const RunConfig& config);

/// Builds the DNS configuration shared by `dns` and `verify`.
dns::DnsConfig dns_config(const RunConfig& config);

} // namespace maghom
