#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hallsim/commands.hpp"
#include "hallsim/config.hpp"

namespace {

int threads_from_env() {
  const char* env = std::getenv("HALLSIM_THREADS");
  if (!env || !*env) return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (const std::exception&) {
    throw hallsim::ConfigError("HALLSIM_THREADS", std::string("expected an integer, got '") + env + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Hall edge-state simulations"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", seeds;
  std::vector<std::string> overrides;
  int threads = 0;
  bool verbose = false;

  for (const auto& name : hallsim::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "config file (key = value lines)")->required();
    sub->add_option("--out,-o", out_dir, "output directory");
    sub->add_option("--seeds", seeds, "disorder seeds, e.g. 1,2,5-8");
    sub->add_option("--threads,-j", threads, "worker threads (default: HALLSIM_THREADS or 1)");
    sub->add_option("--set", overrides, "override a config key: key=value");
    sub->add_flag("--verbose,-v", verbose, "progress on stderr");
  }

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();

  try {
    auto config = hallsim::Config::load(config_path);
    for (const auto& kv : overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw hallsim::ConfigError(kv, "--set expects key=value");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    hallsim::CommandOptions opts;
    opts.threads = threads > 0 ? threads : threads_from_env();
    opts.verbose = verbose;
    if (!seeds.empty()) opts.seeds = hallsim::parse_seed_list(seeds);

    auto outputs = hallsim::run_command(command, config, opts, &std::cerr);
    hallsim::write_outputs(outputs, out_dir);
    for (const auto& [name, content] : outputs) std::cout << out_dir << "/" << name << "\n";
    return 0;
  } catch (const std::exception& e) {
    int code = hallsim::exit_code_for(e);
    std::cerr << "hallsim " << command << ": " << (code == 2 ? "config error: " : "numerical failure: ")
              << e.what() << "\n";
    return code;
  }
}
