#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace disparity {

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

struct RunManifest {
  std::vector<std::string> command_line;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> versions;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;

  /// Digest of the canonical (sorted-key) config dump.
  std::string config_digest() const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// $DISPARITY_OUTPUT_ROOT if set, else the working directory.
std::filesystem::path default_output_root();

/// Resolves a user path: absolute paths stay, relative ones hang off the output root.
std::filesystem::path resolve_output(const std::filesystem::path& p);

/// Output directory for one command. Files are registered as they are
/// written; unless commit() runs, the destructor deletes them (and the
/// directory, if this object created it and it is left empty).
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }
  /// Registers `name` and returns its full path.
  std::filesystem::path file(const std::string& name);
  void write_text(const std::string& name, std::string_view text);
  /// Writes manifest.json listing every registered file.
  void commit(RunManifest manifest);

 private:
  std::filesystem::path dir_;
  bool created_ = false;
  bool committed_ = false;
  std::vector<std::string> files_;
};

}  // namespace disparity
