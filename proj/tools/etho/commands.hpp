#pragma once

#include <functional>

#include <CLI11.hpp>

namespace etho::cli {

// Each registrar adds one top-level subcommand; the selected command stores
// its body in `action`, which main runs after parsing.
using Action = std::function<int()>;

void add_simulate_commands(CLI::App& app, Action& action);
void add_pose_commands(CLI::App& app, Action& action);
void add_behavior_commands(CLI::App& app, Action& action);
void add_report_commands(CLI::App& app, Action& action);

}  // namespace etho::cli
