#include "coevolve/experiment/artifacts.hpp"

#include <fstream>
#include <iterator>
#include <memory>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "coevolve/error.hpp"

namespace coevolve::experiment {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
    throw Error("SHA-256 computation failed");
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot read '{}'", path.string()));
  const std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  return sha256_hex(content);
}

ArtifactSink::ArtifactSink(std::filesystem::path directory)
    : directory_(std::move(directory)) {}

std::filesystem::path ArtifactSink::write(const std::string& name, std::string_view content,
                                          std::string kind, double wall_seconds) {
  const std::filesystem::path path = directory_ / name;
  std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  records_.push_back({name, std::move(kind), sha256_hex(content), wall_seconds});
  return path;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json artifacts_json = nlohmann::json::array();
  for (const auto& a : artifacts)
    artifacts_json.push_back({{"path", a.path},
                              {"kind", a.kind},
                              {"sha256", a.sha256},
                              {"wall_seconds", a.wall_seconds}});
  return {{"command", command},
          {"config_path", config_path},
          {"config_hash", config_hash},
          {"seed", seed},
          {"generator", generator},
          {"library_version", library_version},
          {"integrator", integrator},
          {"threads", threads},
          {"artifacts", artifacts_json},
          {"wall_seconds", wall_seconds}};
}

std::filesystem::path write_manifest(const std::filesystem::path& directory,
                                     const RunManifest& manifest) {
  const std::filesystem::path path = directory / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << manifest.to_json().dump(2) << '\n';
  return path;
}

void prepare_output_directory(const std::filesystem::path& directory) {
  if (std::filesystem::exists(directory) && !std::filesystem::is_directory(directory))
    throw ConfigError(
        fmt::format("output path '{}' exists and is not a directory", directory.string()));
  std::filesystem::create_directories(directory);
}

}  // namespace coevolve::experiment
