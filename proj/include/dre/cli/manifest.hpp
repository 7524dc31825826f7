#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dre::cli {

// Hex SHA-1 of "blob <size>\0<bytes>", as `git hash-object` computes it.
std::string git_blob_sha1(std::string_view bytes);
std::string git_blob_sha1_file(const std::filesystem::path& path);

// "2026-01-31T12:00:00Z"
std::string utc_timestamp(std::chrono::system_clock::time_point t);

// One manifest per run, written as run_manifest.json in the output directory.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  int exit_code = 0;
  std::vector<std::string> artifacts;
  std::vector<std::string> inputs;

  // Inputs are hashed at serialization time. input_hash is the blob hash
  // of the "<sha1> <path>\n" lines for every input, in order.
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& out_dir) const;
};

}  // namespace dre::cli
