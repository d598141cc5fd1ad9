#include "maghom/config.hpp"
#include "maghom/pipeline.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace maghom;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("maghom_pipeline_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(MAGHOM_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    fs::create_directories(dir);
    const auto path = dir / "config.json";
    std::ofstream(path) << text;
    return path;
}

const char* kCell = R"({"command":"cell","geometry":{"shape":"none"},"mu":1.0,"cell":{"n":8}})";

} // namespace

TEST_CASE("cell run writes tagged artifacts") {
    const auto dir = scratch_dir("cell");
    const auto config = parse_config_text(kCell);
    pipeline::RunOptions opt;
    opt.out_dir = dir.string();
    const auto summary = pipeline::run(config, opt);
    CHECK(summary.config_hash == config_hash(config));
    for (const char* name : {"config_echo.json", "effective_tensors.csv", "report.json", "run.log"})
        CHECK(fs::exists(dir / name));

    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["config_hash"] == summary.config_hash);
    CHECK(report["tensors"]["mu_eff"][0][0].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

    const auto echo = nlohmann::json::parse(slurp(dir / "config_echo.json"));
    CHECK(parse_config_text(echo["config"].dump()) == config);

    std::istringstream csv(slurp(dir / "effective_tensors.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "# config_hash: " + summary.config_hash);
    int unit_diagonal = 0;
    while (std::getline(csv, line))
        if (line.rfind("mu_eff,1,1,", 0) == 0 || line.rfind("mu_eff,2,2,", 0) == 0) {
            CHECK(std::stod(line.substr(line.rfind(',') + 1)) == doctest::Approx(1.0).epsilon(1e-9));
            ++unit_diagonal;
        }
    CHECK(unit_diagonal == 2);
    fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte-identical") {
    const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
    const auto config = parse_config_text(
        R"({"command":"macro","geometry":{"shape":"disk","radius":0.2,"mu":[1,2]},"cell":{"n":8},
            "macro":{"n":8,"S":1,"g":[0,1],"k":{"kind":"constant","vector":[1,0]}}})");
    pipeline::RunOptions opt;
    opt.out_dir = a.string();
    const auto summary = pipeline::run(config, opt);
    opt.out_dir = b.string();
    pipeline::run(config, opt);
    for (const auto& name : summary.artifacts) {
        if (name == "run.log") continue;
        CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("error names map to exit codes") {
    CHECK(pipeline::exit_code("ValidationError") == 2);
    CHECK(pipeline::exit_code("ParseError") == 2);
    CHECK(pipeline::exit_code("NotSPD") == 2);
    CHECK(pipeline::exit_code("IncompatibleFlux") == 2);
    CHECK(pipeline::exit_code("NoConvergence") == 3);
    CHECK(pipeline::exit_code("FormulaMismatch") == 3);
    CHECK(pipeline::exit_code("IoError") == 4);
    CHECK(pipeline::exit_code("InternalError") == 1);
    const auto j = pipeline::error_json("IoError", "disk full");
    CHECK(j["error"] == "IoError");
    CHECK(j["message"] == "disk full");
    CHECK(j["exit_code"] == 4);
}

TEST_CASE("command line exit codes") {
    const auto dir = scratch_dir("cli");
    const auto good = write_config(dir / "good", kCell);
    CHECK(run_cli("cell --config " + good.string() + " --out " + (dir / "ok").string() + " --quiet") == 0);
    CHECK(fs::exists(dir / "ok" / "report.json"));

    const auto bad = write_config(dir / "bad", R"({"command":"cell","macro":{"Re":0}})");
    CHECK(run_cli("cell --config " + bad.string() + " --out " + (dir / "bad_out").string()) == 2);
    const auto err = nlohmann::json::parse(slurp(dir / "bad_out" / "error.json"));
    CHECK(err["error"] == "ValidationError");
    CHECK(err["message"] == "Re must be positive");

    CHECK(run_cli("cell --config " + (dir / "missing.json").string() + " --out " + (dir / "m").string()) == 2);
    CHECK(run_cli("stir --config " + good.string()) == 2);

    const auto stalled = write_config(dir / "stall", R"({"command":"cell","cell":{"n":8,"tol":1e-300}})");
    CHECK(run_cli("cell --config " + stalled.string() + " --out " + (dir / "s").string()) == 3);

    std::ofstream(dir / "blocker") << "x";
    CHECK(run_cli("cell --config " + good.string() + " --out " + (dir / "blocker" / "sub").string()) == 4);
    fs::remove_all(dir);
}
