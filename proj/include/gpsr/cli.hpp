#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gpsr::cli {

enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kUsage = 2,
  kUnparseable = 3,  // planning gave up, or `parse` rejected its input
  kExecutionFailed = 4,
  kCheckFailed = 5,
  kBackendUnavailable = 6,
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

EnvLookup process_env();

// Paths after discovery (flag, then GPSR_* environment variable, then the
// data directory default).
struct GlobalConfig {
  std::filesystem::path data_dir;
  std::filesystem::path world;
  std::filesystem::path prompt_bank;
  std::filesystem::path templates;
  std::optional<std::filesystem::path> backends;
  std::filesystem::path out_dir;
  int verbosity = 0;

  // Resolves `requested` against out_dir; UsageError when the result
  // would leave it.
  std::filesystem::path output_path(const std::filesystem::path& requested) const;
};

// argv without the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const EnvLookup& env = process_env());

}  // namespace gpsr::cli
