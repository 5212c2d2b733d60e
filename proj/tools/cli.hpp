#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehdg/driver.hpp"

namespace ehdg::cli {

enum class Command { solve, study, tables, verify };

std::string to_string(Command c);

/// Bad command line, config file, or key value. The message names the key.
class UsageError : public std::invalid_argument {
 public:
  UsageError(const std::string& key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// --help was requested; carries the rendered help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNonConvergence = 2;
inline constexpr int kExitVerificationFailure = 3;

/// Name of the environment variable that sets the worker count.
inline constexpr const char* kWorkersEnv = "EHDG_WORKERS";

struct RunConfig {
  Command command = Command::solve;
  /// Empty means "all applicable cases" for tables and verify.
  std::string case_id;
  std::size_t nel = 16;
  int p = 1;
  /// Unset keeps the case default.
  std::optional<double> dt;
  std::optional<std::size_t> steps;
  /// Unset keeps the stopping rule prescribed by the case.
  std::optional<StoppingMode> stopping;
  double tol = 1e-10;
  /// 0 selects 10 * number of elements.
  std::size_t max_iter = 0;
  /// 0 selects the hardware default.
  int workers = 0;
  std::string out = ".";
  /// Mesh sequence (elements per axis) and order list for study and tables.
  std::vector<std::size_t> nels;
  std::vector<int> orders;
  /// Keys given explicitly in the file, the environment, or on the command line.
  std::set<std::string> explicit_keys;

  bool is_set(const std::string& key) const { return explicit_keys.count(key) > 0; }
};

/// Keys accepted in config files and on the command line.
const std::vector<std::string>& config_keys();

/// Applies one key=value pair. Throws UsageError for unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reads `key=value` lines; `#` starts a comment, blank lines are skipped.
void apply_config_text(RunConfig& config, const std::string& text, const std::string& source = "config");

/// Parses `<command> [--config FILE] [key=value ...] [--key value ...]`.
///
/// Precedence, lowest first: defaults, config file, the worker environment
/// variable (`env_workers`, may be null), key=value tokens, --key flags.
RunConfig parse_config(const std::vector<std::string>& args, const char* env_workers = nullptr);

/// Executes a parsed configuration. Returns one of the kExit* codes.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full entry point: parse, run, map errors to exit codes.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ehdg::cli
