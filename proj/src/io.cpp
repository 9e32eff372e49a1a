#include "chiralloc/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "chiralloc/error.hpp"

namespace chiralloc {

namespace {

nlohmann::json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
        }
        return v;
      },
      cell);
}

std::string cell_csv(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string out = "\"";
          for (char c : v) {
            if (c == '"') out += '"';
            out += c;
          }
          return out + '"';
        }
      },
      cell);
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row width does not match the header");
  }
  rows.push_back(std::move(row));
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out += ',';
    out += table.columns[j];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += cell_csv(row[j]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    rows.push_back(std::move(r));
  }
  return {{"columns", table.columns}, {"rows", std::move(rows)}};
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path directory)
    : dir_(std::move(directory)) {
  std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write_text(const std::string& name,
                                std::string_view content) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error("write to '" + path.string() + "' failed");
  outputs_.push_back({name, sha256_hex(content), content.size()});
}

void ArtifactWriter::write_json(const std::string& name,
                                const nlohmann::json& value) {
  write_text(name, value.dump(2) + "\n");
}

void ArtifactWriter::write_table(const std::string& stem, const Table& table) {
  write_text(stem + ".csv", to_csv(table));
  write_json(stem + ".json", to_json(table));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : outputs) {
    outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  }
  return {{"subcommand", subcommand},
          {"tool_version", tool_version},
          {"base_seed", base_seed},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"config_file", config_file},
          {"config_text", config_text},
          {"config", config},
          {"outputs", std::move(outs)}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.subcommand = j.at("subcommand").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.base_seed = j.at("base_seed").get<std::uint64_t>();
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.config_file = j.value("config_file", "");
  m.config_text = j.at("config_text").get<std::string>();
  m.config = j.value("config", nlohmann::json::object());
  for (const auto& o : j.at("outputs")) {
    m.outputs.push_back({o.at("path").get<std::string>(),
                         o.at("sha256").get<std::string>(),
                         o.at("bytes").get<std::uintmax_t>()});
  }
  return m;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* tool_version() { return CHIRALLOC_VERSION; }

std::string tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace chiralloc
