#pragma once

#include <CLI11.hpp>

#include <string>
#include <vector>

namespace semantic_mesh::cli {

//! Registers all subcommands on the app. Each handler throws semantic_mesh::Error on failure.
void registerCommands(CLI::App& app);

//! Adds values from a subcommand's --config file that are not given as flags. args excludes argv[0].
std::vector<std::string> withConfigArgs(CLI::App& app, std::vector<std::string> args);

}  // namespace semantic_mesh::cli
