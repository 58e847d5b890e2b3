#include "hsprobe/bundle.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>

#include "hsprobe/error.hpp"
#include "hsprobe/prompt.hpp"
#include "hsprobe/run.hpp"

namespace hsprobe::bundle {
namespace {

using nlohmann::json;

// Numbers spelled in letters (0 -> "a", 26 -> "ba") so the placeholder texts
// pass the digit filter of the selection stage.
std::string spelled(std::size_t n) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('a' + n % 26));
    n /= 26;
  } while (n > 0);
  return s;
}

std::string entry_name(const ManifestEntry& e) {
  return e.pair_id + "/" + std::to_string(e.answer_index);
}

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

void scale_to_norm(std::vector<double>& v, double norm) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double f = sq > 0.0 ? norm / std::sqrt(sq) : 0.0;
  for (auto& x : v) x *= f;
}

}  // namespace

void BundleManifest::validate() const {
  if (num_layers < 1 || hidden_dim < 1) {
    throw ValidationError("bundle needs at least one layer and one dimension");
  }
  if (dtype != kDtype) throw ValidationError("unsupported dtype " + dtype);
  std::set<EntryKey> keys;
  for (const auto& e : entries) {
    if (!keys.insert({e.pair_id, e.answer_index}).second) {
      throw ValidationError("duplicate bundle entry " + entry_name(e));
    }
  }
}

json to_json(const BundleManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"pair_id", e.pair_id},
                       {"answer_index", e.answer_index},
                       {"label", e.label ? 1 : 0},
                       {"origin", std::string(corpus::to_string(e.origin))},
                       {"byte_offset", e.byte_offset},
                       {"prompt_hash", prompt::hash_to_hex(e.prompt_hash)}});
  }
  return {{"format", "hsprobe-bundle"},
          {"version", 1},
          {"model_name", m.model_name},
          {"num_layers", m.num_layers},
          {"hidden_dim", m.hidden_dim},
          {"dtype", m.dtype},
          {"prompt_template", std::string(prompt::template_version())},
          {"entries", std::move(entries)}};
}

BundleManifest manifest_from_json(const json& j) {
  BundleManifest m;
  try {
    m.model_name = j.at("model_name").get<std::string>();
    m.num_layers = j.at("num_layers").get<std::size_t>();
    m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    m.dtype = j.at("dtype").get<std::string>();
    const auto& entries = j.at("entries");
    m.entries.reserve(entries.size());
    for (const auto& e : entries) {
      ManifestEntry me;
      me.pair_id = e.at("pair_id").get<std::string>();
      me.answer_index = e.at("answer_index").get<std::size_t>();
      const auto& label = e.at("label");
      me.label = label.is_boolean() ? label.get<bool>() : label.get<int>() == 1;
      me.origin = corpus::origin_from_string(e.value("origin", std::string("original")));
      me.byte_offset = e.at("byte_offset").get<std::uint64_t>();
      me.prompt_hash = prompt::hash_from_hex(e.at("prompt_hash").get<std::string>());
      m.entries.push_back(std::move(me));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed bundle manifest: ") + e.what());
  }
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  return m;
}

SequenceStates::SequenceStates(std::size_t layers, std::size_t dims)
    : layers_(layers), dims_(dims), values_(layers * dims, 0.0f) {}

SequenceStates::SequenceStates(std::size_t layers, std::size_t dims,
                               std::vector<float> values)
    : layers_(layers), dims_(dims), values_(std::move(values)) {
  if (values_.size() != layers * dims) {
    throw ValidationError("state matrix has " + std::to_string(values_.size()) +
                          " values, expected " + std::to_string(layers * dims));
  }
}

std::string SequenceStates::check() const {
  for (std::size_t l = 0; l < layers_; ++l) {
    bool nonzero = false;
    for (float v : row(l)) {
      if (!std::isfinite(v)) return "non-finite value at layer " + std::to_string(l + 1);
      if (v != 0.0f) nonzero = true;
    }
    if (!nonzero) return "all-zero state at layer " + std::to_string(l + 1);
  }
  return {};
}

void write_bundle(const BundleManifest& manifest,
                  std::span<const SequenceStates> states,
                  const std::filesystem::path& dir) {
  manifest.validate();
  if (states.size() != manifest.entries.size()) {
    throw ValidationError("bundle has " + std::to_string(manifest.entries.size()) +
                          " entries but " + std::to_string(states.size()) +
                          " state matrices");
  }
  BundleManifest out = manifest;
  std::string data;
  data.reserve(out.entry_bytes() * states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    if (s.layers() != out.num_layers || s.dims() != out.hidden_dim) {
      throw ValidationError("entry " + entry_name(out.entries[i]) + " is " +
                            std::to_string(s.layers()) + "x" + std::to_string(s.dims()) +
                            ", manifest says " + std::to_string(out.num_layers) + "x" +
                            std::to_string(out.hidden_dim));
    }
    out.entries[i].byte_offset = data.size();
    for (float v : s.values()) {
      const std::uint32_t le = to_little(std::bit_cast<std::uint32_t>(v));
      char bytes[4];
      std::memcpy(bytes, &le, 4);
      data.append(bytes, 4);
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw TransportError("cannot create bundle directory " + dir.string());
  run::write_file(dir / kStatesFile, data);
  run::write_json(dir / kManifestFile, to_json(out));
}

void write_bundle(const BundleManifest& manifest, const StatesMap& states,
                  const std::filesystem::path& dir) {
  manifest.validate();
  if (states.size() != manifest.entries.size()) {
    throw ValidationError("bundle has " + std::to_string(manifest.entries.size()) +
                          " entries but " + std::to_string(states.size()) +
                          " state matrices");
  }
  std::vector<SequenceStates> ordered;
  ordered.reserve(states.size());
  for (const auto& e : manifest.entries) {
    auto it = states.find({e.pair_id, e.answer_index});
    if (it == states.end()) {
      throw ValidationError("no states for bundle entry " + entry_name(e));
    }
    ordered.push_back(it->second);
  }
  write_bundle(manifest, std::span<const SequenceStates>(ordered), dir);
}

BundleReader::BundleReader(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestFile;
  const auto states_path = dir / kStatesFile;
  if (!std::filesystem::exists(manifest_path)) {
    throw IoError("bundle manifest not found: " + manifest_path.string());
  }
  manifest_ = manifest_from_json(run::read_json(manifest_path));

  fd_ = ::open(states_path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) throw IoError("cannot open " + states_path.string());
  struct stat st {};
  if (::fstat(fd_, &st) != 0) {
    ::close(fd_);
    throw IoError("cannot stat " + states_path.string());
  }
  const auto file_size = static_cast<std::uint64_t>(st.st_size);
  const std::uint64_t block = manifest_.entry_bytes();
  const std::uint64_t expected = block * manifest_.entries.size();
  if (file_size != expected) {
    ::close(fd_);
    throw FormatError("states.bin has " + std::to_string(file_size) +
                      " bytes, manifest implies " + std::to_string(expected));
  }
  std::set<std::uint64_t> offsets;
  for (std::size_t i = 0; i < manifest_.entries.size(); ++i) {
    const auto& e = manifest_.entries[i];
    if (e.byte_offset % block != 0 || e.byte_offset + block > file_size ||
        !offsets.insert(e.byte_offset).second) {
      ::close(fd_);
      throw FormatError("bad byte_offset " + std::to_string(e.byte_offset) +
                        " for entry " + entry_name(e));
    }
    index_[{e.pair_id, e.answer_index}] = i;
  }
}

BundleReader::~BundleReader() {
  if (fd_ >= 0) ::close(fd_);
}

BundleReader::BundleReader(BundleReader&& other) noexcept
    : manifest_(std::move(other.manifest_)),
      index_(std::move(other.index_)),
      fd_(std::exchange(other.fd_, -1)) {}

BundleReader& BundleReader::operator=(BundleReader&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    manifest_ = std::move(other.manifest_);
    index_ = std::move(other.index_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

SequenceStates BundleReader::states_at(std::size_t entry) const {
  const auto& e = manifest_.entries.at(entry);
  const std::size_t count = manifest_.num_layers * manifest_.hidden_dim;
  std::vector<std::uint32_t> raw(count);
  auto* dst = reinterpret_cast<char*>(raw.data());
  std::size_t done = 0;
  const std::size_t bytes = count * 4;
  while (done < bytes) {
    const auto n = ::pread(fd_, dst + done, bytes - done,
                           static_cast<off_t>(e.byte_offset + done));
    if (n <= 0) throw IoError("short read for bundle entry " + entry_name(e));
    done += static_cast<std::size_t>(n);
  }
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(to_little(raw[i]));
  }
  SequenceStates s(manifest_.num_layers, manifest_.hidden_dim, std::move(values));
  if (auto problem = s.check(); !problem.empty()) {
    throw FormatError("bundle entry " + entry_name(e) + ": " + problem);
  }
  return s;
}

std::size_t BundleReader::entry_index(const std::string& pair_id,
                                      std::size_t answer_index) const {
  auto it = index_.find({pair_id, answer_index});
  if (it == index_.end()) {
    throw MismatchError("no bundle entry " + pair_id + "/" + std::to_string(answer_index));
  }
  return it->second;
}

SequenceStates BundleReader::states(const std::string& pair_id,
                                    std::size_t answer_index) const {
  return states_at(entry_index(pair_id, answer_index));
}

BundleReader read_bundle(const std::filesystem::path& dir) { return BundleReader(dir); }

AlignmentReport check_alignment(const BundleManifest& manifest,
                                const corpus::Dataset& dataset) {
  AlignmentReport report;
  std::set<std::string> bundle_pairs;
  std::set<std::string> reported;
  for (const auto& e : manifest.entries) {
    bundle_pairs.insert(e.pair_id);
    const corpus::Example* ex = corpus::find_example(dataset, e.pair_id);
    if (ex == nullptr) {
      if (reported.insert(e.pair_id).second) report.missing_in_dataset.push_back(e.pair_id);
      continue;
    }
    const corpus::QAPair* pair = corpus::find_pair(dataset, e.pair_id);
    if (e.answer_index >= pair->answers.size() ||
        pair->answers[e.answer_index].label != e.label) {
      report.label_mismatches.push_back(entry_name(e));
      continue;
    }
    const auto& answer = pair->answers[e.answer_index];
    if (prompt::prompt_hash(ex->text, pair->question, answer.text) != e.prompt_hash) {
      report.hash_mismatches.push_back(entry_name(e));
    }
  }
  for (const auto& ex : dataset) {
    for (const auto& p : ex.pairs) {
      if (!bundle_pairs.contains(p.pair_id)) report.missing_in_bundle.push_back(p.pair_id);
    }
  }
  return report;
}

void SynthConfig::validate() const {
  if (layers < 1 || dims < 1 || num_pairs < 1 || group_size < 1) {
    throw ValidationError("synthetic bundle counts must be at least 1");
  }
  if (!(separation >= 0.0) || !(common_scale >= 0.0) || !(weak_factor >= 0.0)) {
    throw ValidationError("separation, common_scale and weak_factor must be >= 0");
  }
  if (weak_layer > layers) {
    throw ValidationError("weak layer " + std::to_string(weak_layer) +
                          " outside 1.." + std::to_string(layers));
  }
}

SynthBundle synth_bundle(const SynthConfig& config) {
  config.validate();
  SynthBundle out;
  out.manifest.model_name = config.model_name;
  out.manifest.num_layers = config.layers;
  out.manifest.hidden_dim = config.dims;
  const std::size_t L = config.layers, D = config.dims;
  const double root_d = std::sqrt(static_cast<double>(D));
  const double half_gap = 0.5 * config.separation * root_d;

  for (std::size_t p = 0; p < config.num_pairs; ++p) {
    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(p + 1)));
    auto direction = gaussian_vector(rng, D);
    scale_to_norm(direction, 1.0);
    std::vector<std::vector<double>> shared(L);
    for (std::size_t l = 0; l < L; ++l) {
      shared[l] = gaussian_vector(rng, D);
      const double factor = (l + 1 == config.weak_layer) ? config.weak_factor : 1.0;
      scale_to_norm(shared[l], config.common_scale * root_d * factor);
    }

    corpus::Example ex;
    ex.idx = static_cast<std::int64_t>(p);
    ex.text = "Synthetic passage " + spelled(p) + ".";
    corpus::QAPair pair;
    pair.pair_id = std::to_string(p) + "-0";
    pair.question = "Synthetic question " + spelled(p) + "?";

    std::normal_distribution<double> normal;
    for (std::size_t a = 0; a < 2 * config.group_size; ++a) {
      const bool label = a < config.group_size;
      const double sign = label ? 1.0 : -1.0;
      SequenceStates s(L, D);
      for (std::size_t l = 0; l < L; ++l) {
        auto r = s.row(l);
        for (std::size_t d = 0; d < D; ++d) {
          r[d] = static_cast<float>(shared[l][d] + sign * half_gap * direction[d] +
                                    normal(rng));
        }
      }
      const std::size_t k = label ? a : a - config.group_size;
      corpus::Answer answer{"Synthetic " + std::string(label ? "true" : "false") +
                                " answer " + spelled(k) + " for pair " + spelled(p) + ".",
                            label, corpus::Origin::kOriginal};
      ManifestEntry e;
      e.pair_id = pair.pair_id;
      e.answer_index = a;
      e.label = label;
      e.origin = answer.origin;
      e.byte_offset = out.states.size() * out.manifest.entry_bytes();
      e.prompt_hash = prompt::prompt_hash(ex.text, pair.question, answer.text);
      out.manifest.entries.push_back(std::move(e));
      out.states.push_back(std::move(s));
      pair.answers.push_back(std::move(answer));
    }
    ex.pairs.push_back(std::move(pair));
    out.dataset.push_back(std::move(ex));
  }
  return out;
}

json to_json(const SynthConfig& c) {
  return {{"layers", c.layers},
          {"dims", c.dims},
          {"num_pairs", c.num_pairs},
          {"group_size", c.group_size},
          {"separation", c.separation},
          {"seed", c.seed},
          {"common_scale", c.common_scale},
          {"weak_layer", c.weak_layer},
          {"weak_factor", c.weak_factor},
          {"model_name", c.model_name}};
}

}  // namespace hsprobe::bundle
