#include "disparity/manifest.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace disparity {

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

std::string RunManifest::config_digest() const { return fnv1a_hex(config.dump()); }

nlohmann::json RunManifest::to_json() const {
  return {
      {"command_line", command_line},
      {"config", config},
      {"config_digest", config_digest()},
      {"seeds", seeds},
      {"versions", versions},
      {"outputs", outputs},
      {"wall_clock_seconds", wall_clock_seconds},
  };
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command_line = j.at("command_line").get<std::vector<std::string>>();
  m.config = j.value("config", nlohmann::json::object());
  m.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});
  m.versions = j.value("versions", std::map<std::string, std::string>{});
  m.outputs = j.value("outputs", std::vector<std::string>{});
  m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  return m;
}

std::filesystem::path default_output_root() {
  if (const char* root = std::getenv("DISPARITY_OUTPUT_ROOT"); root != nullptr && *root != '\0') return root;
  return std::filesystem::current_path();
}

std::filesystem::path resolve_output(const std::filesystem::path& p) {
  return p.is_absolute() ? p : default_output_root() / p;
}

OutputDir::OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  if (!std::filesystem::exists(dir_, ec)) {
    std::filesystem::create_directories(dir_);
    created_ = true;
  } else if (!std::filesystem::is_directory(dir_)) {
    throw std::runtime_error(dir_.string() + " exists and is not a directory");
  }
}

OutputDir::~OutputDir() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& f : files_) std::filesystem::remove(dir_ / f, ec);
  if (created_ && std::filesystem::is_empty(dir_, ec)) std::filesystem::remove(dir_, ec);
}

std::filesystem::path OutputDir::file(const std::string& name) {
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  return dir_ / name;
}

void OutputDir::write_text(const std::string& name, std::string_view text) {
  const auto p = file(name);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

void OutputDir::commit(RunManifest manifest) {
  manifest.outputs = files_;
  std::sort(manifest.outputs.begin(), manifest.outputs.end());
  write_text("manifest.json", manifest.to_json().dump(2) + "\n");
  committed_ = true;
}

}  // namespace disparity
