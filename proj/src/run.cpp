#include "hsprobe/run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>

#include "hsprobe/error.hpp"

namespace hsprobe::run {
namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  const std::string content = read_file(path);
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex.append(buf, 2);
  }
  return hex;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

std::vector<std::string> list_files(const fs::path& dir) {
  std::vector<std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == kStageManifest) continue;
    files.push_back(std::move(rel));
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string display_path(const fs::path& run_dir, const fs::path& p) {
  std::error_code ec;
  const auto abs_run = fs::weakly_canonical(run_dir, ec);
  const auto abs_p = fs::weakly_canonical(p, ec);
  const auto rel = abs_p.lexically_relative(abs_run);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

void write_stage_manifest(const fs::path& run_dir, const fs::path& stage_dir,
                          const std::string& stage, const std::vector<StageInput>& inputs,
                          const json& config) {
  json in = json::array();
  for (const auto& input : inputs) {
    json files = json::array();
    if (fs::is_directory(input.path)) {
      for (const auto& f : list_files(input.path)) {
        files.push_back({{"path", f}, {"sha256", sha256_file(input.path / f)}});
      }
      in.push_back({{"role", input.role},
                    {"path", display_path(run_dir, input.path)},
                    {"files", std::move(files)}});
    } else {
      in.push_back({{"role", input.role},
                    {"path", display_path(run_dir, input.path)},
                    {"sha256", sha256_file(input.path)}});
    }
  }
  json out = json::array();
  for (const auto& f : list_files(stage_dir)) {
    out.push_back({{"path", f}, {"sha256", sha256_file(stage_dir / f)}});
  }
  write_json(stage_dir / kStageManifest, {{"stage", stage},
                                          {"tool_version", kToolVersion},
                                          {"config", config},
                                          {"inputs", std::move(in)},
                                          {"outputs", std::move(out)}});
}

void prepare_stage_dir(const fs::path& stage_dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(stage_dir) && !fs::is_empty(stage_dir)) {
    if (!overwrite) {
      throw IoError(stage_dir.string() +
                    " already has outputs; pass --overwrite to replace them");
    }
    fs::remove_all(stage_dir, ec);
    if (ec) throw IoError("cannot clear " + stage_dir.string());
  }
  fs::create_directories(stage_dir, ec);
  if (ec) throw IoError("cannot create " + stage_dir.string());
}

}  // namespace hsprobe::run
