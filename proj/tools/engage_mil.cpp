#include <cstdlib>
#include <iostream>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "engage_mil/cli/commands.hpp"
#include "engage_mil/cli/config.hpp"

namespace cli = engage::cli;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("engage-mil");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("ENGAGE_MIL_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Weakly supervised engagement intensity from video segments"};
  app.require_subcommand(1);

  std::string config_path;
  cli::Overrides overrides;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string model, out;

  using Command = void (*)(const cli::RunConfig&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"extract", cli::cmd_extract}, {"synth", cli::cmd_synth},       {"train", cli::cmd_train},
      {"predict", cli::cmd_predict}, {"localize", cli::cmd_localize}, {"eval", cli::cmd_eval},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed);
    sub->add_option("--jobs", jobs, "worker threads for extraction");
    sub->add_option("--model", model, "model file");
    sub->add_option("--out", out, "output file or directory");
    subs.emplace_back(sub, fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (const auto& [sub, fn] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--jobs")) overrides.jobs = jobs;
    if (sub->count("--model")) overrides.model = model;
    if (sub->count("--out")) overrides.out = out;
    try {
      auto config = cli::load_config(config_path);
      cli::apply(config, overrides);
      fn(config, std::cout);
      return 0;
    } catch (const engage::Error& e) {
      spdlog::error("{}", e.what());
      return cli::exit_code(e.code());
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      return 3;
    }
  }
  return 2;
}
