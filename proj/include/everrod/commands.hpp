#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "everrod/errors.hpp"

namespace everrod {

struct CommandOptions {
  std::string settings_overrides;  // see apply_settings_overrides
  int jobs = 0;                    // 0 keeps the OpenMP default
  bool check_trends = false;
  bool include_timing = false;     // wall clock makes report.json non-reproducible
};

struct RunReport {
  std::string command;
  std::string inputs_digest;  // sha256 of the input bytes
  std::string tool_version;
  nlohmann::ordered_json results;
  double wall_clock_s = 0.0;

  nlohmann::ordered_json to_json(bool include_timing) const;
};

// Failed --check-trends assertion.
class TrendViolationError : public Error {
 public:
  using Error::Error;
};

// Each command writes its artifacts into `out_dir` (created if missing) and
// returns the report that was written as JSON.
RunReport cmd_simulate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                       const CommandOptions& options = {});
RunReport cmd_battery(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                      const CommandOptions& options = {});
RunReport cmd_fit(const std::filesystem::path& data_dir, const std::string& kind,
                  const std::filesystem::path& out_dir, const CommandOptions& options = {});
RunReport cmd_design(const std::filesystem::path& problem, const std::filesystem::path& out_dir,
                     const CommandOptions& options = {});
void cmd_plot(const std::vector<std::filesystem::path>& curves,
              const std::filesystem::path& out_svg, const std::string& title);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace everrod
