#pragma once

#include "maghom/cell.hpp"
#include "maghom/fem/fields.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace maghom::io {

std::string sha256_hex(const std::string& data);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text(const std::string& path, const std::string& content);

/// Two-space indented JSON with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& value);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// `tensor,i,j,m,n,value` rows (1-based indices, unused ones 0) for mu_eff,
/// N, B and B_sym, preceded by a `# config_hash:` comment line.
std::string tensors_csv(const cell::EffectiveTensors& t, const std::string& hash);

struct VtkPointScalar {
    std::string name;
    std::vector<double> values;
};

struct VtkPointVector {
    std::string name;
    std::vector<fem::Vec3> values;
};

struct VtkCellTensor {
    std::string name;
    std::vector<fem::Mat3> values;
};

/// Legacy ASCII STRUCTURED_POINTS file over the mesh node lattice.
std::string vtk_structured(const PeriodicMesh& mesh, const std::string& title, const std::vector<VtkPointScalar>& scalars,
                           const std::vector<VtkPointVector>& vectors, const std::vector<VtkCellTensor>& tensors,
                           const std::vector<VtkPointScalar>& cell_scalars = {});

/// Nodal values of a field on the full (unidentified) node lattice; blocked
/// fields are averaged over the blocks of the adjacent non-zero elements.
std::vector<double> nodal_values(const fem::ScalarField& f);
std::vector<fem::Vec3> nodal_values(const fem::VectorField& f);

/// Element-average of a 2-point-Gauss tensor field.
std::vector<fem::Mat3> element_average(const fem::TensorQuadField& f);

} // namespace maghom::io
