#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "ehdg/errors.hpp"
#include "ehdg/problems.hpp"

namespace ehdg::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError(key, "malformed value '" + text + "'");
  }
  return value;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  if (!text.empty() && text.front() == '-') throw UsageError(key, "must be positive, got '" + text + "'");
  const auto v = parse_number<unsigned long long>(key, text);
  if (v == 0) throw UsageError(key, "must be positive, got '" + text + "'");
  return static_cast<std::size_t>(v);
}

int parse_positive_int(const std::string& key, const std::string& text) {
  const int v = parse_number<int>(key, text);
  if (v <= 0) throw UsageError(key, "must be positive, got '" + text + "'");
  return v;
}

double parse_positive_real(const std::string& key, const std::string& text) {
  const double v = parse_number<double>(key, text);
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(key, "must be positive, got '" + text + "'");
  return v;
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse(key, trim(item)));
  if (out.empty()) throw UsageError(key, "empty list");
  return out;
}

/// Splits `key=value`; throws when there is no '='.
std::pair<std::string, std::string> split_setting(const std::string& token, const std::string& where) {
  const auto eq = token.find('=');
  if (eq == std::string::npos) throw UsageError(trim(token), "expected key=value in " + where);
  return {trim(token.substr(0, eq)), trim(token.substr(eq + 1))};
}

Command parse_command(const std::string& name) {
  if (name == "solve") return Command::solve;
  if (name == "study") return Command::study;
  if (name == "tables") return Command::tables;
  if (name == "verify") return Command::verify;
  throw UsageError("command", "unknown command '" + name + "'");
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::study: return "study";
    case Command::tables: return "tables";
    case Command::verify: return "verify";
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"case", "nel",      "p",       "dt",  "steps", "stopping", "tol",
                                                "max_iter", "workers", "out", "nels",  "orders"};
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "case") {
    const auto& ids = catalog_ids();
    if (std::find(ids.begin(), ids.end(), value) == ids.end()) {
      throw UsageError(key, "unknown case '" + value + "'");
    }
    config.case_id = value;
  } else if (key == "nel") {
    config.nel = parse_count(key, value);
  } else if (key == "p") {
    config.p = parse_positive_int(key, value);
  } else if (key == "dt") {
    config.dt = parse_positive_real(key, value);
  } else if (key == "steps") {
    config.steps = parse_count(key, value);
  } else if (key == "stopping") {
    try {
      config.stopping = parse_stopping_mode(value);
    } catch (const ConfigError&) {
      throw UsageError(key, "unknown stopping mode '" + value + "'");
    }
  } else if (key == "tol") {
    config.tol = parse_positive_real(key, value);
  } else if (key == "max_iter") {
    config.max_iter = parse_count(key, value);
  } else if (key == "workers") {
    config.workers = parse_positive_int(key, value);
  } else if (key == "out") {
    if (value.empty()) throw UsageError(key, "empty path");
    config.out = value;
  } else if (key == "nels") {
    config.nels = parse_list<std::size_t>(key, value, parse_count);
  } else if (key == "orders") {
    config.orders = parse_list<int>(key, value, parse_positive_int);
  } else {
    throw UsageError(key, "unknown key");
  }
  config.explicit_keys.insert(key);
}

void apply_config_text(RunConfig& config, const std::string& text, const std::string& source) {
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto [key, value] = split_setting(line, source + " line " + std::to_string(number));
    apply_setting(config, key, value);
  }
}

RunConfig parse_config(const std::vector<std::string>& args, const char* env_workers) {
  CLI::App app{"eHDG fixed-point solver for HDG transport and shallow water", "ehdg"};
  app.require_subcommand(1);

  struct Scratch {
    std::string config_file;
    std::vector<std::string> tokens;
    std::map<std::string, std::string> flags;
  };
  std::map<std::string, Scratch> scratch;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "Run one case and write convergence_log.csv and field.txt"},
      {"study", "h-convergence study; writes rate_table.csv"},
      {"tables", "Iteration-count tables; writes table1.csv and table2.csv"},
      {"verify", "Cross-check the iteration against the direct solve"},
  };
  for (const auto& [name, help] : commands) {
    Scratch& s = scratch[name];
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", s.config_file, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("settings", s.tokens, "key=value overrides");
    for (const std::string& key : config_keys()) {
      sub->add_option("--" + key, s.flags[key], "Overrides " + key);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    throw HelpRequested(sub->help());
  } catch (const CLI::ParseError& e) {
    throw UsageError("command line", e.what());
  }

  const CLI::App* chosen = app.get_subcommands().front();
  RunConfig config;
  config.command = parse_command(chosen->get_name());
  const Scratch& s = scratch[chosen->get_name()];

  if (!s.config_file.empty()) {
    std::ifstream in(s.config_file);
    if (!in) throw UsageError("config", "cannot read '" + s.config_file + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(config, buffer.str(), s.config_file);
  }
  if (env_workers != nullptr && *env_workers != '\0') {
    try {
      apply_setting(config, "workers", env_workers);
    } catch (const UsageError& e) {
      throw UsageError(kWorkersEnv, e.what());
    }
  }
  for (const std::string& token : s.tokens) {
    const auto [key, value] = split_setting(token, "command line");
    apply_setting(config, key, value);
  }
  for (const std::string& key : config_keys()) {
    if (chosen->count("--" + key) > 0) apply_setting(config, key, s.flags.at(key));
  }

  if ((config.command == Command::solve || config.command == Command::study) && config.case_id.empty()) {
    throw UsageError("case", "required for " + to_string(config.command));
  }
  return config;
}

}  // namespace ehdg::cli
