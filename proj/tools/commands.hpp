#pragma once

#include <CLI11.hpp>
#include <functional>

namespace gnome::cli {

// A subcommand's run step; returns the process exit code.
using Action = std::function<int()>;

// Registers every subcommand on `app`. Exactly one action is stored in
// `selected` after a successful parse.
void register_commands(CLI::App& app, Action& selected);

}  // namespace gnome::cli
