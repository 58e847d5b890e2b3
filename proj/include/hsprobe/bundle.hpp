#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsprobe/corpus.hpp"
#include "json.hpp"

// Hidden-state interchange: manifest.json + states.bin, one L x D block of
// little-endian float32 per answer (last prompt token, one row per layer).
namespace hsprobe::bundle {

inline constexpr const char* kDtype = "f32le";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kStatesFile = "states.bin";

struct ManifestEntry {
  std::string pair_id;
  std::size_t answer_index = 0;
  bool label = false;
  corpus::Origin origin = corpus::Origin::kOriginal;
  std::uint64_t byte_offset = 0;
  std::uint64_t prompt_hash = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct BundleManifest {
  std::string model_name;
  std::size_t num_layers = 0;
  std::size_t hidden_dim = 0;
  std::string dtype = kDtype;
  std::vector<ManifestEntry> entries;

  std::size_t entry_bytes() const { return 4 * num_layers * hidden_dim; }
  /// Dimensions, dtype and key uniqueness. Offsets are checked against a
  /// data file size by read_bundle.
  void validate() const;

  friend bool operator==(const BundleManifest&, const BundleManifest&) = default;
};

nlohmann::json to_json(const BundleManifest& manifest);
BundleManifest manifest_from_json(const nlohmann::json& j);

/// Row-major layers x dims matrix of one answer's last-token states.
/// Layer rows are 0-based here; reports use 1-based layer numbers.
class SequenceStates {
 public:
  SequenceStates() = default;
  SequenceStates(std::size_t layers, std::size_t dims);
  SequenceStates(std::size_t layers, std::size_t dims, std::vector<float> values);

  std::size_t layers() const { return layers_; }
  std::size_t dims() const { return dims_; }

  std::span<const float> row(std::size_t layer) const {
    return {values_.data() + layer * dims_, dims_};
  }
  std::span<float> row(std::size_t layer) {
    return {values_.data() + layer * dims_, dims_};
  }
  std::span<const float> values() const { return values_; }

  /// Empty string when finite with a nonzero entry in every row, otherwise a
  /// description of the first problem.
  std::string check() const;

  friend bool operator==(const SequenceStates&, const SequenceStates&) = default;

 private:
  std::size_t layers_ = 0;
  std::size_t dims_ = 0;
  std::vector<float> values_;
};

using EntryKey = std::pair<std::string, std::size_t>;
using StatesMap = std::map<EntryKey, SequenceStates>;

/// Writes the bundle. Offsets are assigned in entry order; the stored
/// manifest reflects them. Throws ValidationError when `states` does not
/// cover exactly the manifest entries or dimensions disagree.
void write_bundle(const BundleManifest& manifest, const StatesMap& states,
                  const std::filesystem::path& dir);
/// Same, with states given in manifest entry order.
void write_bundle(const BundleManifest& manifest,
                  std::span<const SequenceStates> states,
                  const std::filesystem::path& dir);

/// Random-access reader. Accessors are const and safe to call from several
/// threads at once.
class BundleReader {
 public:
  explicit BundleReader(const std::filesystem::path& dir);
  ~BundleReader();
  BundleReader(BundleReader&&) noexcept;
  BundleReader& operator=(BundleReader&&) noexcept;
  BundleReader(const BundleReader&) = delete;
  BundleReader& operator=(const BundleReader&) = delete;

  const BundleManifest& manifest() const { return manifest_; }
  std::size_t size() const { return manifest_.entries.size(); }

  /// Throws FormatError naming the entry on NaN/inf or an all-zero layer.
  SequenceStates states_at(std::size_t entry) const;
  SequenceStates states(const std::string& pair_id,
                        std::size_t answer_index) const;
  std::size_t entry_index(const std::string& pair_id,
                          std::size_t answer_index) const;

 private:
  BundleManifest manifest_;
  std::map<EntryKey, std::size_t> index_;
  int fd_ = -1;
};

BundleReader read_bundle(const std::filesystem::path& dir);

/// Bundle/dataset agreement: every pair on both sides, matching labels, and
/// prompt hashes recomputed from the dataset equal to the stored ones.
struct AlignmentReport {
  std::vector<std::string> missing_in_dataset;  // pair ids
  std::vector<std::string> missing_in_bundle;   // pair ids
  std::vector<std::string> label_mismatches;    // pair_id/answer_index
  std::vector<std::string> hash_mismatches;     // pair_id/answer_index

  bool ok() const {
    return missing_in_dataset.empty() && missing_in_bundle.empty() &&
           label_mismatches.empty() && hash_mismatches.empty();
  }
};

AlignmentReport check_alignment(const BundleManifest& manifest,
                                const corpus::Dataset& dataset);

struct SynthConfig {
  std::size_t layers = 8;
  std::size_t dims = 64;
  std::size_t num_pairs = 200;
  std::size_t group_size = 5;
  /// Distance between the true and false cluster means, in units of the
  /// per-coordinate standard deviation times sqrt(dims).
  double separation = 0.0;
  std::uint64_t seed = 0;
  /// Norm of the per-pair shared mean, in units of sqrt(dims). Keeps cosines
  /// away from zero the way real hidden states share a dominant direction.
  double common_scale = 1.5;
  /// 1-based layer whose shared component is scaled by `weak_factor`; 0 for
  /// none.
  std::size_t weak_layer = 0;
  double weak_factor = 0.0;
  std::string model_name = "synthetic";

  void validate() const;
};

/// A generated bundle together with the placeholder dataset its prompt
/// hashes were computed from.
struct SynthBundle {
  BundleManifest manifest;
  std::vector<SequenceStates> states;  // manifest entry order
  corpus::Dataset dataset;
};

/// Per pair and layer, true states ~ N(mu_T, I) and false states ~ N(mu_F, I)
/// with mu_T - mu_F = separation * sqrt(dims) * u along a unit direction u
/// fixed per pair. Bit-identical for a given config.
SynthBundle synth_bundle(const SynthConfig& config);

nlohmann::json to_json(const SynthConfig& config);

}  // namespace hsprobe::bundle
