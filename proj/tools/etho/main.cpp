#include <exception>
#include <filesystem>
#include <iostream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "etho/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"etho: multi-camera keypoint labeling and behavior timelines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "etho 0.1.0");

  etho::cli::Action action;
  etho::cli::add_simulate_commands(app, action);
  etho::cli::add_pose_commands(app, action);
  etho::cli::add_behavior_commands(app, action);
  etho::cli::add_report_commands(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (!action) return 0;

  try {
    return action();
  } catch (const etho::Error& e) {
    std::cerr << "etho: error: " << e.what() << "\n";
    return etho::exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "etho: error: malformed JSON input: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "etho: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "etho: internal error: " << e.what() << "\n";
    return 1;
  }
}
