#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hallsim/config.hpp"

namespace hallsim {

struct CommandOptions {
  std::vector<std::uint64_t> seeds;
  int threads = 1;
  bool verbose = false;
};

// (file name, contents) in emission order.
using Outputs = std::vector<std::pair<std::string, std::string>>;

const std::vector<std::string>& command_names();

// Validates the whole config before computing; throws ConfigError or Error.
Outputs run_command(const std::string& name, const Config& config, const CommandOptions& options,
                    std::ostream* log = nullptr);

// 0 ok, 2 config error, 3 numerical failure.
int exit_code_for(const std::exception& e);

void write_outputs(const Outputs& outputs, const std::string& directory);

}  // namespace hallsim
