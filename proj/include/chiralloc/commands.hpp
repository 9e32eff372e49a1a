#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "chiralloc/config.hpp"

namespace chiralloc {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

const std::vector<std::string>& subcommands();

// Runs one subcommand and writes its artifacts plus a manifest into
// config.out_dir. Human-readable progress goes to `out`; on failure a JSON
// error record goes to `err`. Never throws.
int run_command(const std::string& subcommand, const RunConfig& config,
                std::ostream& out, std::ostream& err);

// Re-runs the manifest's subcommand with its recorded configuration into
// `out_dir` (the recorded one when empty) and compares every digest.
int reproduce_manifest(const std::filesystem::path& manifest,
                       const std::filesystem::path& out_dir, std::ostream& out,
                       std::ostream& err);

// JSON error record for an exception, with its exit code.
struct ErrorRecord {
  int exit_code = kExitNumerical;
  std::string json;
};
ErrorRecord describe_error(const std::exception_ptr& error);

}  // namespace chiralloc
