#include <cstdio>
#include <exception>

#include "commands.hpp"
#include "gnome/error.hpp"
#include "gnome/pipeline.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kStageFailure = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnome: synthetic negotiation dialogue pipeline"};
  app.require_subcommand(1);
  gnome::cli::Action action;
  gnome::cli::register_commands(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    return action();
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const gnome::StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kStageFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kStageFailure;
  }
}
