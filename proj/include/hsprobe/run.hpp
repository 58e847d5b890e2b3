#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

// Run-directory plumbing: file I/O, content hashes, stage manifests.
namespace hsprobe::run {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kStageManifest = "stage_manifest.json";

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view bytes);

nlohmann::json read_json(const std::filesystem::path& path);
/// Two-space indented with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Files under `dir`, relative, sorted, skipping the stage manifest.
std::vector<std::string> list_files(const std::filesystem::path& dir);

/// `p` relative to `run_dir` when it lies inside it, else as given.
std::string display_path(const std::filesystem::path& run_dir,
                         const std::filesystem::path& p);

struct StageInput {
  std::string role;
  std::filesystem::path path;
};

/// Writes <stage_dir>/stage_manifest.json listing inputs and outputs with
/// hashes. Paths inside `run_dir` are recorded relative to it.
void write_stage_manifest(const std::filesystem::path& run_dir,
                          const std::filesystem::path& stage_dir,
                          const std::string& stage,
                          const std::vector<StageInput>& inputs,
                          const nlohmann::json& config);

/// Creates `stage_dir`. An existing non-empty directory is an IoError unless
/// `overwrite`, in which case it is cleared first.
void prepare_stage_dir(const std::filesystem::path& stage_dir, bool overwrite);

}  // namespace hsprobe::run
