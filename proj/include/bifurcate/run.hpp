// Command orchestration behind the bifurcate executable.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bifurcate/config.hpp"

namespace bifurcate {

enum ExitStatus { kExitOk = 0, kExitError = 1, kExitVerifyFailed = 2 };

const std::vector<std::string>& command_names();

struct RunRequest {
  std::string command;
  RunConfig config;
  bool force = false;
  std::optional<std::filesystem::path> out;  // overrides output.directory
};

struct RunResult {
  int status = kExitOk;
  std::vector<std::filesystem::path> written;
};

// Writes artifacts and a short summary to `log`; errors go to `err` with status 1.
RunResult run(const RunRequest& req, std::ostream& log, std::ostream& err);

}  // namespace bifurcate
