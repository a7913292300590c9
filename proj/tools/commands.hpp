#pragma once

#include <CLI11.hpp>

#include <functional>
#include <vector>

namespace cmvdyn::cli {

/// A registered subcommand and the action to run once it has been parsed.
struct Command {
    CLI::App* app = nullptr;
    std::function<void()> run;
};

/// Worker count from CMVDYN_WORKERS (a positive integer), else the hardware concurrency.
unsigned workers_from_env();

std::vector<Command> register_commands(CLI::App& app);

}  // namespace cmvdyn::cli
