#include "maghom/config.hpp"
#include "maghom/error.hpp"
#include "maghom/io.hpp"
#include "maghom/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <iostream>

namespace {

int fail(const std::string& out_dir, const std::string& name, const std::string& message) {
    const auto record = maghom::pipeline::error_json(name, message);
    std::cerr << record.dump() << '\n';
    try {
        maghom::io::write_json((std::filesystem::path(out_dir) / "error.json").string(), record);
    } catch (const std::exception&) {
    }
    return record["exit_code"].get<int>();
}

/// The positional command takes precedence over the one in the file.
maghom::RunConfig load_config(const std::string& path, const std::string& command) {
    std::ifstream in(path);
    if (!in) throw maghom::ParseError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    auto root = nlohmann::json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) return maghom::parse_config_text(text, path);
    root["command"] = command;
    return maghom::parse_config_text(root.dump(), path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-scale homogenization of magnetizable rigid particles in Stokes flow"};
    std::string command, config_path, out_dir = "out";
    int threads = 1;
    bool quiet = false;
    app.add_option("command", command, "cell, macro, dns or verify")
        ->required()
        ->check(CLI::IsMember({"cell", "macro", "dns", "verify"}));
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_flag("--quiet", quiet, "Suppress progress lines");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const maghom::RunConfig config = load_config(config_path, command);
        maghom::pipeline::RunOptions options;
        options.out_dir = out_dir;
        options.threads = threads;
        options.progress = quiet ? nullptr : &std::cerr;
        const auto summary = maghom::pipeline::run(config, options);
        std::cout << "config_hash " << summary.config_hash << '\n';
        for (const auto& a : summary.artifacts) std::cout << "wrote " << (std::filesystem::path(out_dir) / a).string() << '\n';
        return 0;
    } catch (const maghom::Error& e) {
        return fail(out_dir, e.name(), e.what());
    } catch (const std::exception& e) {
        return fail(out_dir, "InternalError", e.what());
    }
}
