#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "procat/workspace.hpp"

namespace procat {

inline constexpr const char* kReportSchema = "procat-report/1";
inline constexpr const char* kHorizonEnv = "PROCAT_HORIZON";

struct CliOptions {
  bool json = false;
  std::optional<std::filesystem::path> replay;
  Limits limits;
  std::optional<std::string> gamma;
  std::optional<std::string> pair;
};

struct CliResult {
  int exit_code = 0;  // 0 Holds/success, 1 Fails/validation error, 2 Inconclusive
  Json report;
};

// Every documented command, as listed by `procat --help`.
const std::vector<std::string>& cli_commands();

CliResult run_command(const std::string& command, const std::filesystem::path& workspace,
                      const std::vector<std::string>& args, const CliOptions& options);
std::string render_text(const Json& report);
// Full command line entry point (argument parsing, output, exit code).
int cli_main(int argc, char** argv);

}  // namespace procat
