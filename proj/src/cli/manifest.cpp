#include "dre/cli/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>

#include <boost/uuid/detail/sha1.hpp>

#include "dre/error.hpp"

namespace dre::cli {

std::string git_blob_sha1(std::string_view bytes) {
  boost::uuids::detail::sha1 sha;
  const std::string header = "blob " + std::to_string(bytes.size());
  sha.process_bytes(header.data(), header.size() + 1);  // includes the NUL
  sha.process_bytes(bytes.data(), bytes.size());
  boost::uuids::detail::sha1::digest_type digest;
  sha.get_digest(digest);
  char hex[41];
  for (int i = 0; i < 5; ++i) std::snprintf(hex + 8 * i, 9, "%08x", digest[i]);
  return std::string(hex, 40);
}

std::string git_blob_sha1_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return git_blob_sha1(bytes);
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json inputs_json = nlohmann::json::array();
  std::string listing;
  for (const auto& path : inputs) {
    const std::string sha = git_blob_sha1_file(path);
    inputs_json.push_back({{"path", path}, {"blob_sha1", sha}});
    listing += sha + " " + path + "\n";
  }
  return {{"command", command},
          {"args", args},
          {"config", config},
          {"seed", seed},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"exit_code", exit_code},
          {"artifacts", artifacts},
          {"inputs", inputs_json},
          {"input_hash", git_blob_sha1(listing)}};
}

void RunManifest::write(const std::filesystem::path& out_dir) const {
  std::ofstream out(out_dir / "run_manifest.json");
  if (!out) throw ConfigError("cannot write '" + (out_dir / "run_manifest.json").string() + "'");
  out << to_json().dump(2) << '\n';
}

}  // namespace dre::cli
