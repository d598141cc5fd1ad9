#include "maghom/cell.hpp"
#include "maghom/error.hpp"
#include "maghom/io.hpp"

#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace maghom;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("maghom_io_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("SHA-256 matches the published test vector") {
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("shortest double text reads back exactly") {
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(1.0) == "1");
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int k = 0; k < 200; ++k) {
        const double x = u(rng) * std::pow(10.0, k % 20 - 10);
        const std::string s = io::format_double(x);
        double y = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), y);
        CHECK(y == x);
    }
}

TEST_CASE("tensor CSV follows the column contract") {
    const auto t = cell::run_cell_problems(2, 8, GeometrySpec{}).tensors;
    const auto rows = lines(io::tensors_csv(t, "abc123"));
    REQUIRE(rows.size() == 2 + 4 + 16 + 16 + 16);
    CHECK(rows[0] == "# config_hash: abc123");
    CHECK(rows[1] == "tensor,i,j,m,n,value");
    CHECK(rows[2].rfind("mu_eff,1,1,0,0,", 0) == 0);
    CHECK(rows[5].rfind("mu_eff,2,2,0,0,", 0) == 0);
    CHECK(rows[6].rfind("N,1,1,1,1,", 0) == 0);
    CHECK(rows[22].rfind("B,1,1,1,1,", 0) == 0);
    CHECK(rows[38].rfind("B_sym,1,1,1,1,", 0) == 0);
    for (std::size_t k = 2; k < rows.size(); ++k) {
        int commas = 0;
        for (char c : rows[k]) commas += c == ',';
        CHECK(commas == 5);
    }
}

TEST_CASE("write_text creates parent directories and reports failures") {
    const auto dir = scratch_dir("write");
    const auto file = dir / "a" / "b" / "x.txt";
    io::write_text(file.string(), "hello");
    std::ifstream in(file);
    std::string s;
    std::getline(in, s);
    CHECK(s == "hello");
    CHECK_THROWS_AS(io::write_text((file / "child.txt").string(), "x"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("legacy VTK layout") {
    const auto mesh = std::make_shared<const PeriodicMesh>(build_box_mesh(2, {1.0, 2.0, 1.0}, 4));
    Vec vals(mesh->num_dof_nodes());
    for (int node = 0; node < mesh->num_nodes(); ++node) vals(mesh->dof_node(node)) = mesh->node_coords(node)[0];
    const fem::ScalarField f(mesh, vals);
    const auto nodal = io::nodal_values(f);
    for (int node = 0; node < mesh->num_nodes(); ++node)
        CHECK(nodal[node] == doctest::Approx(mesh->node_coords(node)[0]));
    const auto rows = lines(io::vtk_structured(*mesh, "title hash", {{"x", nodal}}, {}, {}));
    CHECK(rows[0] == "# vtk DataFile Version 3.0");
    CHECK(rows[1] == "title hash");
    CHECK(rows[2] == "ASCII");
    CHECK(rows[3] == "DATASET STRUCTURED_POINTS");
    CHECK(rows[4] == "DIMENSIONS 5 5 1");
    CHECK(rows[6] == "SPACING 0.25 0.5 1");
    CHECK(rows[7] == "POINT_DATA 25");
    CHECK(rows[8] == "SCALARS x double 1");
    // x-fastest ordering
    CHECK(rows[10] == "0");
    CHECK(rows[11] == "0.25");
    CHECK(rows.size() == 10 + 25);
}

TEST_CASE("periodic nodal values repeat on slave nodes") {
    const auto mesh = std::make_shared<const PeriodicMesh>(build_unit_cell_mesh(2, 4));
    Vec vals = Vec::LinSpaced(mesh->num_dof_nodes(), 0.0, 1.0);
    const auto nodal = io::nodal_values(fem::ScalarField(mesh, vals));
    CHECK(nodal[mesh->node_at({4, 2, 0})] == nodal[mesh->node_at({0, 2, 0})]);
}
