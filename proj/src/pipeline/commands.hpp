// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pipeline/config.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::pipeline {

struct CommandResult {
  std::string log; // human-readable summary, one fact per line
  std::vector<std::filesystem::path> products;
};

const std::vector<std::string_view> &command_names();

/// Runs one workflow step. Products are written atomically; failures raise
/// floeberg::Error with the kind that decides the exit status.
CommandResult run_command(std::string_view command, const PipelineConfig &config);

} // namespace floeberg::pipeline
