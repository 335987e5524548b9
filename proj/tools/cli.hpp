#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sbcrb::cli {

/// Bad configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Numerical failure at a specific grid point.
class GridPointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// key = value document; values may be grids written as [a, b, c].
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<input>");
  static Config load(const std::string& path);

  /// Applies a "key=value" override (value may be a grid).
  void set(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::vector<double> doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<long long> ints(const std::string& key, std::vector<long long> fallback) const;
  double scalar(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;

 private:
  void assign(const std::string& key, const std::string& raw, const std::string& where);
  const std::vector<std::string>* find(const std::string& key) const;

  std::map<std::string, std::vector<std::string>> values_;
};

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_csv(std::ostream& out, const Table& t);
void write_json(std::ostream& out, const Table& t);

struct RunRequest {
  std::string command;     // crb, ncae, mse-sweep, pilot-budget
  std::string subcommand;  // crb only: det-exact, det-asym, stoch-exact, stoch-asym
  Config config;
  std::optional<std::uint64_t> seed;
  std::optional<long long> trials;
};

/// Validates the whole grid, then evaluates it. Throws ConfigError or GridPointError.
Table run(const RunRequest& req);

/// Full command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace sbcrb::cli
