#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace coevolve::experiment {

inline constexpr std::string_view kLibraryVersion = "1.0.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct ArtifactRecord {
  std::string path;  // relative to the output directory
  std::string kind;
  std::string sha256;
  double wall_seconds = 0.0;
};

/// Writes artifacts under one directory and records their hashes.
class ArtifactSink {
 public:
  explicit ArtifactSink(std::filesystem::path directory);

  const std::filesystem::path& directory() const noexcept { return directory_; }
  std::filesystem::path write(const std::string& name, std::string_view content,
                              std::string kind, double wall_seconds = 0.0);
  const std::vector<ArtifactRecord>& records() const noexcept { return records_; }

 private:
  std::filesystem::path directory_;
  std::vector<ArtifactRecord> records_;
};

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string generator;
  std::string library_version{kLibraryVersion};
  nlohmann::json integrator;
  std::size_t threads = 1;
  std::vector<ArtifactRecord> artifacts;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
};

/// Writes manifest.json next to the artifacts it lists.
std::filesystem::path write_manifest(const std::filesystem::path& directory,
                                     const RunManifest& manifest);

/// Fresh directory for a run; refuses paths that exist as regular files.
void prepare_output_directory(const std::filesystem::path& directory);

}  // namespace coevolve::experiment
