#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace chiralloc {

// Doubles print with 17 significant digits; NaN prints as "nan" in CSV and
// null in JSON.
using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

std::string format_double(double x);

// One header row, comma separated, LF line endings.
std::string to_csv(const Table& table);
// {"columns": [...], "rows": [[...], ...]}
nlohmann::json to_json(const Table& table);

std::string sha256_hex(std::string_view bytes);

struct OutputRecord {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

// Writes artifacts into one directory and remembers their digests.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path directory);

  const std::filesystem::path& directory() const noexcept { return dir_; }
  const std::vector<OutputRecord>& outputs() const noexcept { return outputs_; }

  void write_text(const std::string& name, std::string_view content);
  void write_json(const std::string& name, const nlohmann::json& value);
  // stem.csv plus its JSON mirror stem.json.
  void write_table(const std::string& stem, const Table& table);

 private:
  std::filesystem::path dir_;
  std::vector<OutputRecord> outputs_;
};

struct RunManifest {
  std::string subcommand;
  std::string config_text;  // resolved configuration, parseable as a config file
  nlohmann::json config;    // same values, structured
  std::uint64_t base_seed = 0;
  std::string tool_version;
  std::string started_at;   // ISO 8601 UTC
  std::string finished_at;
  std::string config_file;  // resolved configuration written next to outputs
  std::vector<OutputRecord> outputs;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

std::string utc_timestamp();
const char* tool_version();

// "%g" rendering used inside file names; '-' stays, '.' stays.
std::string tag(double x);

}  // namespace chiralloc
