// Python module _hsprobe: thin wrappers over the C++ core.
// Structured results cross the boundary as plain dicts (via their JSON form).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hsprobe/augment.hpp"
#include "hsprobe/bundle.hpp"
#include "hsprobe/cli.hpp"
#include "hsprobe/corpus.hpp"
#include "hsprobe/layerscan.hpp"
#include "hsprobe/prompt.hpp"
#include "hsprobe/run.hpp"
#include "hsprobe/simkit.hpp"
#include "hsprobe/stats.hpp"
#include "hsprobe/text.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace hsprobe;

namespace {

py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

char32_t one_char(const std::string& s) {
  const auto u = text::decode_utf8(s);
  if (u.size() != 1) throw py::value_error("expected a single character");
  return u[0];
}

stats::Center parse_center(const std::string& c) {
  if (c == "mean") return stats::Center::kMean;
  if (c == "median") return stats::Center::kMedian;
  throw py::value_error("center must be 'mean' or 'median'");
}

stats::TTestVariant parse_variant(const std::string& v) {
  if (v == "student") return stats::TTestVariant::kStudent;
  if (v == "welch") return stats::TTestVariant::kWelch;
  if (v == "paired") return stats::TTestVariant::kPaired;
  throw py::value_error("variant must be 'student', 'welch' or 'paired'");
}

}  // namespace

PYBIND11_MODULE(_hsprobe, m) {
  m.doc() = "Hidden-state similarity probing core";
  m.attr("tool_version") = run::kToolVersion;

  // text and corpus
  m.def("normalize_text", &corpus::normalize_text);
  m.def("char_length", &text::char_length);
  m.def("word_count", &text::word_count);
  m.def("contains_decimal_digit", &text::contains_decimal_digit);
  m.def("is_punctuation", [](const std::string& c) { return text::is_punctuation(one_char(c)); });
  m.def("is_space", [](const std::string& c) { return text::is_space(one_char(c)); });
  m.def("is_decimal_digit",
        [](const std::string& c) { return text::is_decimal_digit(one_char(c)); });
  m.def("to_lower", [](const std::string& c) {
    return text::encode_utf8(std::u32string(1, text::to_lower(one_char(c))));
  });
  m.def("rouge_tokens", &augment::rouge_tokens);
  m.def("rouge1", &augment::rouge1, py::arg("candidate"), py::arg("reference"));
  m.def("intra_group_rouge1", [](const std::vector<std::string>& texts) {
    std::vector<corpus::Answer> group;
    for (const auto& t : texts) group.push_back({t, true});
    return corpus::intra_group_rouge1(group);
  });
  m.def(
      "select_dataset",
      [](const fs::path& path, std::size_t min_true, std::size_t min_false, std::size_t min_words,
         double max_len_diff, bool forbid_digits) {
        corpus::SelectionCriteria c{min_true, min_false, min_words, max_len_diff, forbid_digits};
        corpus::SelectionReport rep;
        const auto d = corpus::select_pairs(corpus::normalize_dataset(corpus::load_dataset(path)),
                                            c, &rep);
        return py::make_tuple(to_py(corpus::to_json(d)), to_py(corpus::to_json(rep)));
      },
      py::arg("path"), py::arg("min_true") = 2, py::arg("min_false") = 2,
      py::arg("min_words") = 5, py::arg("max_len_diff") = 30.0, py::arg("forbid_digits") = true);

  // prompt
  m.def("template_text", [] { return std::string(prompt::template_text()); });
  m.def("build_prompt", &prompt::build_prompt, py::arg("knowledge"), py::arg("question"),
        py::arg("answer"));
  m.def("fnv1a64", [](const py::bytes& b) { return prompt::fnv1a64(std::string(b)); });
  m.def("prompt_hash", &prompt::prompt_hash, py::arg("knowledge"), py::arg("question"),
        py::arg("answer"));

  // stats
  m.def("reg_inc_beta", &stats::reg_inc_beta);
  m.def("t_sf", &stats::t_sf);
  m.def("f_sf", &stats::f_sf);
  m.def(
      "levene",
      [](const std::vector<double>& a, const std::vector<double>& b, const std::string& center) {
        return to_py(stats::to_json(stats::levene_test(a, b, parse_center(center))));
      },
      py::arg("a"), py::arg("b"), py::arg("center") = "mean");
  m.def(
      "t_test",
      [](const std::vector<double>& a, const std::vector<double>& b, const std::string& variant) {
        return to_py(stats::to_json(stats::t_test(a, b, parse_variant(variant))));
      },
      py::arg("a"), py::arg("b"), py::arg("variant") = "student");
  m.def(
      "normality",
      [](const std::vector<double>& x, double alpha) {
        return to_py(stats::to_json(stats::normality_check(x, alpha)));
      },
      py::arg("sample"), py::arg("alpha") = 0.05);
  m.def(
      "hypothesis_test",
      [](std::vector<double> a, std::vector<double> b, double alpha, double headline_alpha,
         const std::string& center, bool paired) {
        stats::PipelineOptions o{alpha, headline_alpha, parse_center(center), paired};
        return to_py(stats::to_json(stats::hypothesis_pipeline({std::move(a), std::move(b), ""}, o)));
      },
      py::arg("a"), py::arg("b"), py::arg("alpha") = 0.05, py::arg("headline_alpha") = 0.001,
      py::arg("center") = "mean", py::arg("paired") = false);

  // similarity and layers
  m.def("cosine", [](const std::vector<float>& u, const std::vector<float>& v) {
    if (u.size() != v.size()) throw py::value_error("vectors differ in length");
    return simkit::cosine(u, v);
  });
  m.def("min_abs", [](const std::vector<double>& s) { return layerscan::min_abs(s); });
  m.def("layer_diffs", [](const std::vector<double>& s) {
    const auto d = layerscan::layer_diffs(s);
    return py::make_tuple(d.pos_dif, d.neg_dif);
  });
  m.def("mode_freq", [](const std::vector<std::size_t>& idx) {
    const auto r = layerscan::mode_freq(idx);
    return py::make_tuple(r.mode, r.freq);
  });

  m.def(
      "synth_bundle",
      [](const fs::path& out_dir, std::size_t layers, std::size_t dims, std::size_t pairs,
         std::size_t group_size, double separation, std::uint64_t seed, std::size_t weak_layer,
         double weak_factor) {
        bundle::SynthConfig c;
        c.layers = layers;
        c.dims = dims;
        c.num_pairs = pairs;
        c.group_size = group_size;
        c.separation = separation;
        c.seed = seed;
        c.weak_layer = weak_layer;
        c.weak_factor = weak_factor;
        const auto s = bundle::synth_bundle(c);
        bundle::write_bundle(s.manifest, s.states, out_dir);
        return to_py(bundle::to_json(s.manifest));
      },
      py::arg("out_dir"), py::arg("layers") = 8, py::arg("dims") = 64, py::arg("pairs") = 200,
      py::arg("group_size") = 5, py::arg("separation") = 0.0, py::arg("seed") = 0,
      py::arg("weak_layer") = 0, py::arg("weak_factor") = 0.0);
  m.def(
      "analyze_bundle",
      [](const fs::path& dir, bool exclude_self, std::size_t bins, unsigned threads) {
        simkit::AnalysisResult result;
        layerscan::ScanResult scan;
        {
          py::gil_scoped_release release;
          const bundle::BundleReader reader(dir);
          const auto pairs = simkit::collect_pairs(reader, threads);
          result = simkit::analyze(reader.manifest().model_name, pairs, exclude_self, bins, threads);
          scan = layerscan::scan_layers(result);
        }
        py::dict d;
        d["analysis"] = to_py(simkit::to_json(result));
        d["layers"] = to_py(layerscan::to_json(scan));
        return d;
      },
      py::arg("bundle_dir"), py::arg("exclude_self") = true, py::arg("bins") = 20,
      py::arg("threads") = 1);

  // full command line, returns (exit code, stdout, stderr)
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
