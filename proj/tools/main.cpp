#include "commands.hpp"

#include "cmvdyn/error.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

// Machine-readable failure record on stderr.
int report_error(const std::string& kind, const std::string& message, int code,
                 std::optional<long long> largest_feasible = std::nullopt) {
    nlohmann::json j;
    j["status"] = "error";
    j["kind"] = kind;
    j["message"] = message;
    if (largest_feasible) j["largest_feasible"] = *largest_feasible;
    std::cerr << j.dump() << std::endl;
    return code;
}

int exit_code(cmvdyn::ErrorKind kind) {
    using cmvdyn::ErrorKind;
    switch (kind) {
    case ErrorKind::resource: return 3;
    case ErrorKind::numerical:
    case ErrorKind::truncation: return 4;
    default: return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamics of CMV matrices and coined quantum walks.\n"
                 "Environment: CMVDYN_WORKERS sets the worker count (default: hardware threads)."};
    app.set_config("--config", "", "Read options from an INI/TOML key-value file ([subcommand] sections)");
    app.require_subcommand(1);
    const auto commands = cmvdyn::cli::register_commands(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 2);
    }

    try {
        for (const auto& c : commands)
            if (c.app->parsed()) c.run();
    } catch (const cmvdyn::ResourceError& e) {
        return report_error(std::string(cmvdyn::to_string(e.kind())), e.what(), 3, e.admissible());
    } catch (const cmvdyn::Error& e) {
        return report_error(std::string(cmvdyn::to_string(e.kind())), e.what(), exit_code(e.kind()));
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 5);
    }
    return 0;
}
