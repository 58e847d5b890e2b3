#include "hsprobe/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "hsprobe/error.hpp"
#include "hsprobe/paraphrase.hpp"
#include "hsprobe/report.hpp"
#include "hsprobe/run.hpp"
#include "hsprobe/simkit.hpp"

namespace hsprobe::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

unsigned thread_count(const RunConfig& c) {
  if (c.threads > 0) return c.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

fs::path stage_path(const RunConfig& c, const char* stage) { return c.run_dir / stage; }

void require_run_dir(const RunConfig& c) {
  if (c.run_dir.empty()) throw ValidationError("--run-dir is required");
}

std::string shown(const RunConfig& c, const fs::path& p) {
  return p.empty() ? std::string() : run::display_path(c.run_dir, p);
}

fs::path start_stage(const RunConfig& c, const char* stage) {
  require_run_dir(c);
  const fs::path dir = stage_path(c, stage);
  run::prepare_stage_dir(dir, c.overwrite);
  return dir;
}

void finish_stage(const RunConfig& c, const fs::path& dir, const char* stage,
                  std::vector<run::StageInput> inputs, json config) {
  if (!c.config_file.empty()) {
    // The config file is kept verbatim next to the outputs it produced.
    const fs::path copy = dir / ("input_config" + c.config_file.extension().string());
    run::write_file(copy, run::read_file(c.config_file));
    inputs.push_back({"config_file", c.config_file});
  }
  run::write_stage_manifest(c.run_dir, dir, stage, inputs, config);
}

void require_file(const fs::path& p, const char* stage) {
  if (!fs::exists(p)) {
    throw DependencyError("missing " + p.string() + "; run the '" + stage + "' stage first");
  }
}

corpus::DatasetFormat parse_format(const std::string& s) {
  if (s == "auto") return corpus::DatasetFormat::kAuto;
  if (s == "jsonl") return corpus::DatasetFormat::kJsonl;
  if (s == "json") return corpus::DatasetFormat::kSingleJson;
  throw ValidationError("unknown dataset format '" + s + "'");
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string list_some(const std::vector<std::string>& items) {
  constexpr std::size_t kShown = 20;
  std::string s;
  for (std::size_t i = 0; i < items.size() && i < kShown; ++i) {
    if (i) s += ", ";
    s += items[i];
  }
  if (items.size() > kShown) s += " (+" + std::to_string(items.size() - kShown) + " more)";
  return s;
}

fs::path latest_dataset(const RunConfig& c) {
  for (const char* stage : {"augment", "prepare", "synth"}) {
    const fs::path p = stage_path(c, stage) / "dataset.json";
    if (fs::exists(p)) return p;
  }
  throw DependencyError("no dataset in " + c.run_dir.string() +
                        "; run 'prepare', 'augment' or 'synth' first, or pass --dataset");
}

}  // namespace

void cmd_prepare(const RunConfig& c, std::ostream& out) {
  if (c.dataset.empty()) throw ValidationError("prepare needs --dataset");
  if (!fs::exists(c.dataset)) throw IoError("dataset not found: " + c.dataset.string());
  auto criteria = c.criteria;
  criteria.forbid_digits = !c.allow_digits;
  criteria.validate();
  corpus::ParseOptions parse;
  parse.format = parse_format(c.format);

  auto dataset = corpus::load_dataset(c.dataset, parse);
  if (dataset.empty()) throw ValidationError("no examples parsed from " + c.dataset.string());
  dataset = corpus::normalize_dataset(std::move(dataset));
  corpus::SelectionReport selection;
  const auto selected = corpus::select_pairs(dataset, criteria, &selection);

  const fs::path dir = start_stage(c, "prepare");
  corpus::write_dataset(selected, dir / "dataset.json");
  run::write_json(dir / "selection_report.json", corpus::to_json(selection));
  if (!selected.empty()) {
    run::write_json(dir / "corpus_stats.json", corpus::to_json(corpus::corpus_stats(selected)));
  }
  finish_stage(c, dir, "prepare", {{"dataset", c.dataset}},
               {{"format", c.format}, {"criteria", corpus::to_json(criteria)}});

  out << selection.examples_out << " examples / " << selection.pairs_out << " pairs\n"
      << selection.answers_out << " answers\n";
}

void cmd_augment(const RunConfig& c, std::ostream& out) {
  require_run_dir(c);
  const fs::path input =
      c.augment_input.empty() ? stage_path(c, "prepare") / "dataset.json" : c.augment_input;
  require_file(input, "prepare");
  const auto dataset = corpus::load_dataset(input);

  augment::AugmentOptions options = c.augment;
  if (c.oversize == "truncate") {
    options.oversize = augment::OversizePolicy::kTruncate;
  } else if (c.oversize == "error") {
    options.oversize = augment::OversizePolicy::kError;
  } else {
    throw ValidationError("--oversize must be 'truncate' or 'error'");
  }

  std::vector<augment::RewriteSet> rewrites;
  std::vector<run::StageInput> inputs{{"dataset", input}};
  bool fetched = false;
  if (!c.rewrites.empty()) {
    rewrites = augment::load_rewrites(c.rewrites);
    inputs.push_back({"rewrites", c.rewrites});
  } else if (!c.endpoint_url.empty()) {
    augment::EndpointConfig endpoint;
    endpoint.base_url = c.endpoint_url;
    endpoint.model = c.endpoint_model;
    augment::FetchOptions fetch;
    fetch.min_interval = std::chrono::milliseconds(c.min_interval_ms);
    fetch.target_size = options.target_size;
    rewrites = augment::fetch_paraphrases(dataset, augment::http_completion(endpoint), fetch);
    fetched = true;
  }

  augment::AugmentReport report;
  const auto augmented = augment::augment_dataset(dataset, rewrites, options, &report);

  const fs::path dir = start_stage(c, "augment");
  corpus::write_dataset(augmented, dir / "dataset.json");
  run::write_json(dir / "augment_report.json", augment::to_json(report));
  if (fetched) run::write_json(dir / "rewrites.json", augment::to_json(rewrites));
  if (!augmented.empty()) {
    run::write_json(dir / "corpus_stats.json", corpus::to_json(corpus::corpus_stats(augmented)));
  }
  finish_stage(c, dir, "augment", inputs,
               {{"target_size", options.target_size},
                {"max_len_diff_chars", options.max_len_diff_chars},
                {"oversize", c.oversize},
                {"endpoint", c.endpoint_url},
                {"endpoint_model", c.endpoint_model}});

  out << "removed " << report.examples_removed << " examples\n"
      << report.examples_out << " examples / " << report.pairs_out << " pairs\n";
}

void cmd_synth(const RunConfig& c, std::ostream& out) {
  auto config = c.synth;
  config.seed = c.seed;
  config.validate();
  const auto synth = bundle::synth_bundle(config);

  const fs::path dir = start_stage(c, "synth");
  bundle::write_bundle(synth.manifest, synth.states, dir / "bundle");
  corpus::write_dataset(synth.dataset, dir / "dataset.json");
  finish_stage(c, dir, "synth", {}, bundle::to_json(config));

  out << "bundle " << shown(c, dir / "bundle") << ": model " << synth.manifest.model_name << ", "
      << synth.manifest.entries.size() << " entries, " << synth.manifest.num_layers
      << " layers x " << synth.manifest.hidden_dim << " dims\n";
}

void cmd_analyze(const RunConfig& c, std::ostream& out) {
  require_run_dir(c);
  const fs::path bundle_dir =
      c.bundle_dir.empty() ? stage_path(c, "synth") / "bundle" : c.bundle_dir;
  if (!fs::exists(bundle_dir / bundle::kManifestFile)) {
    throw DependencyError("no bundle at " + bundle_dir.string() +
                          "; pass --bundle or run the 'synth' stage first");
  }
  const fs::path dataset_path = c.analyze_input.empty() ? latest_dataset(c) : c.analyze_input;
  const auto dataset = corpus::load_dataset(dataset_path);
  const auto reader = bundle::read_bundle(bundle_dir);

  const auto alignment = bundle::check_alignment(reader.manifest(), dataset);
  if (!alignment.ok()) {
    std::string msg = "bundle and dataset disagree";
    if (!alignment.missing_in_dataset.empty()) {
      msg += "; pairs missing from the dataset: " + list_some(alignment.missing_in_dataset);
    }
    if (!alignment.missing_in_bundle.empty()) {
      msg += "; pairs missing from the bundle: " + list_some(alignment.missing_in_bundle);
    }
    if (!alignment.label_mismatches.empty()) {
      msg += "; label mismatches: " + list_some(alignment.label_mismatches);
    }
    if (!alignment.hash_mismatches.empty()) {
      msg += "; prompt hash mismatches: " + list_some(alignment.hash_mismatches);
    }
    throw MismatchError(msg);
  }

  const unsigned threads = thread_count(c);
  const auto pairs = simkit::collect_pairs(reader, threads);
  const auto result = simkit::analyze(reader.manifest().model_name, pairs, !c.include_self,
                                      c.bins, threads);

  const fs::path dir = start_stage(c, "analyze");
  run::write_json(dir / "similarity.json", simkit::to_json(result));
  run::write_file(dir / "table5.csv", report::table5_csv(result));
  finish_stage(c, dir, "analyze", {{"bundle", bundle_dir}, {"dataset", dataset_path}},
               {{"exclude_self", !c.include_self}, {"bins", c.bins}});

  const auto& m = result.categories;
  out << "own true " << fixed(m.own_true) << " / cross " << fixed(m.cross) << " / own false "
      << fixed(m.own_false) << " (" << m.n_pairs << " pairs)\n";
}

void cmd_test(const RunConfig& c, std::ostream& out) {
  require_run_dir(c);
  const fs::path input = stage_path(c, "analyze") / "similarity.json";
  require_file(input, "analyze");
  const auto analysis = simkit::analysis_from_json(run::read_json(input));

  stats::PipelineOptions options = c.test;
  if (c.center == "mean") {
    options.center = stats::Center::kMean;
  } else if (c.center == "median") {
    options.center = stats::Center::kMedian;
  } else {
    throw ValidationError("--center must be 'mean' or 'median'");
  }

  stats::SamplePair false_side{{}, {}, "false answers: own group vs true group"};
  stats::SamplePair true_side{{}, {}, "true answers: own group vs false group"};
  for (const auto& p : analysis.pairs) {
    false_side.a.push_back(p.averages.own_false);
    false_side.b.push_back(p.averages.cross_false_to_true);
    true_side.a.push_back(p.averages.own_true);
    true_side.b.push_back(p.averages.cross_true_to_false);
  }
  std::vector<stats::TestReport> reports{stats::hypothesis_pipeline(false_side, options),
                                         stats::hypothesis_pipeline(true_side, options)};

  const fs::path dir = start_stage(c, "test");
  json j = json::array();
  for (const auto& r : reports) j.push_back(stats::to_json(r));
  run::write_json(dir / "test_report.json", {{"model_name", analysis.model_name},
                                              {"reports", std::move(j)}});
  run::write_file(dir / "table6.csv", report::table6_csv(analysis.model_name, reports));
  finish_stage(c, dir, "test", {{"analysis", input}},
               {{"alpha", options.alpha},
                {"headline_alpha", options.headline_alpha},
                {"center", c.center},
                {"paired", options.paired}});

  for (const auto& r : reports) {
    char p[32];
    std::snprintf(p, sizeof p, "%.3g", r.test.p);
    out << r.description << ": " << stats::to_string(r.chosen_test) << " p = " << p
        << (r.reject_at_headline ? " (rejected at " : " (not rejected at ")
        << r.headline_alpha << ")\n";
    for (const auto& w : r.warnings) out << "  warning: " << w << "\n";
  }
}

void cmd_layers(const RunConfig& c, std::ostream& out) {
  require_run_dir(c);
  const fs::path input = stage_path(c, "analyze") / "similarity.json";
  require_file(input, "analyze");
  const auto analysis = simkit::analysis_from_json(run::read_json(input));

  layerscan::ScanOptions options;
  options.sign = c.absolute_dif ? layerscan::DifSign::kAbsolute : layerscan::DifSign::kSigned;
  // Shallower models get the range clipped to their depth.
  options.occurrence_last = std::min(c.occurrence_last, analysis.layers);
  options.occurrence_first = std::min(c.occurrence_first, options.occurrence_last);
  const auto scan = layerscan::scan_layers(analysis, options);

  const fs::path dir = start_stage(c, "layers");
  run::write_json(dir / "layerscan.json", layerscan::to_json(scan));
  run::write_file(dir / "table7.csv", report::table7_csv(scan));
  run::write_file(dir / "appendix_e.csv", report::appendix_e_csv(scan));
  run::write_file(dir / "group_dif_maxima.csv", report::group_dif_maxima_csv(scan));
  run::write_file(dir / "occurrence.csv", report::occurrence_csv(scan));
  finish_stage(c, dir, "layers", {{"analysis", input}},
               {{"group_dif_sign", c.absolute_dif ? "absolute" : "signed"},
                {"occurrence_first", options.occurrence_first},
                {"occurrence_last", options.occurrence_last}});

  out << "group_dif mode: false " << scan.group_dif_false.summary.mode << " ("
      << scan.group_dif_false.summary.freq << "), true " << scan.group_dif_true.summary.mode
      << " (" << scan.group_dif_true.summary.freq << ")\n";
}

void cmd_report(const RunConfig& c, std::ostream& out) {
  require_run_dir(c);
  report::ReportRequest request;
  request.run_dir = c.run_dir;
  request.outputs.clear();
  for (const auto& o : c.outputs) request.outputs.insert(report::output_from_string(o));
  request.ramp_low = report::Rgb::parse(c.ramp_low);
  request.ramp_high = report::Rgb::parse(c.ramp_high);
  request.validate();

  const fs::path dir = stage_path(c, "reports");
  if (fs::exists(dir) && !fs::is_empty(dir) && !c.overwrite) {
    throw IoError(dir.string() + " already has outputs; pass --overwrite to replace them");
  }
  const auto manifest = report::render_report(request);
  std::vector<run::StageInput> inputs;
  for (const auto& in : manifest.at("inputs")) {
    inputs.push_back({in.at("path").get<std::string>(),
                      c.run_dir / in.at("path").get<std::string>()});
  }
  json outputs = json::array();
  for (auto o : request.outputs) outputs.push_back(report::to_string(o));
  finish_stage(c, dir, "report", inputs,
               {{"outputs", outputs}, {"ramp", {request.ramp_low.hex(), request.ramp_high.hex()}}});

  out << manifest.at("artifacts").size() << " report files in " << dir.string() << "\n";
  for (const auto& note : manifest.at("notes")) out << "note: " << note.get<std::string>() << "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Hidden-state probe: true/false answer subspaces across layers", "hsprobe"};
  app.set_config("--config", "", "TOML/INI file whose keys mirror the options");
  app.add_option("--run-dir", c.run_dir, "Run directory");
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  app.add_option("--seed", c.seed, "Random seed");
  app.add_flag("--overwrite", c.overwrite, "Replace existing stage outputs");
  app.require_subcommand(1, 1);
  app.fallthrough();

  auto* prepare = app.add_subcommand("prepare", "Parse, normalize and select QA pairs");
  prepare->add_option("--dataset", c.dataset, "MuSeRC-style JSON or JSONL file");
  prepare->add_option("--format", c.format, "auto, jsonl or json");
  prepare->add_option("--min-true", c.criteria.min_true);
  prepare->add_option("--min-false", c.criteria.min_false);
  prepare->add_option("--min-words", c.criteria.min_words);
  prepare->add_option("--max-len-diff", c.criteria.max_len_diff_chars);
  prepare->add_flag("--allow-digits", c.allow_digits);

  auto* aug = app.add_subcommand("augment", "Complete answer groups with rewrite variants");
  aug->add_option("--dataset", c.augment_input, "Default: <run>/prepare/dataset.json");
  aug->add_option("--rewrites", c.rewrites, "JSON file of rewrite variants");
  aug->add_option("--endpoint", c.endpoint_url, "Chat-completion base URL (token from HSPROBE_API_KEY)");
  aug->add_option("--endpoint-model", c.endpoint_model);
  aug->add_option("--min-interval-ms", c.min_interval_ms);
  aug->add_option("--target-size", c.augment.target_size);
  aug->add_option("--max-len-diff", c.augment.max_len_diff_chars);
  aug->add_option("--oversize", c.oversize, "truncate or error");

  auto* synth = app.add_subcommand("synth", "Write a synthetic hidden-state bundle");
  synth->add_option("--layers", c.synth.layers);
  synth->add_option("--dims", c.synth.dims);
  synth->add_option("--pairs", c.synth.num_pairs);
  synth->add_option("--group-size", c.synth.group_size);
  synth->add_option("--separation", c.synth.separation);
  synth->add_option("--common-scale", c.synth.common_scale);
  synth->add_option("--weak-layer", c.synth.weak_layer, "1-based; 0 for none");
  synth->add_option("--weak-factor", c.synth.weak_factor);
  synth->add_option("--model-name", c.synth.model_name);

  auto* analyze = app.add_subcommand("analyze", "Layer-wise similarity of answers to groups");
  analyze->add_option("--bundle", c.bundle_dir, "Default: <run>/synth/bundle");
  analyze->add_option("--dataset", c.analyze_input, "Default: latest dataset in the run");
  analyze->add_flag("--include-self", c.include_self);
  analyze->add_option("--bins", c.bins);

  auto* test = app.add_subcommand("test", "Hypothesis tests on per-pair similarity averages");
  test->add_option("--alpha", c.test.alpha);
  test->add_option("--headline-alpha", c.test.headline_alpha);
  test->add_option("--center", c.center, "Levene center: mean or median");
  test->add_flag("--paired", c.test.paired);

  auto* layers = app.add_subcommand("layers", "Weak-layer criteria");
  layers->add_flag("--absolute", c.absolute_dif, "Use |group_dif|");
  layers->add_option("--occurrence-first", c.occurrence_first);
  layers->add_option("--occurrence-last", c.occurrence_last);

  auto* rep = app.add_subcommand("report", "Render tables and figures");
  rep->add_option("--outputs", c.outputs);
  rep->add_option("--ramp-low", c.ramp_low);
  rep->add_option("--ramp-high", c.ramp_high);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (auto* opt = app.get_config_ptr(); opt != nullptr && opt->count() > 0) {
    c.config_file = opt->as<std::string>();
  }

  try {
    if (prepare->parsed()) cmd_prepare(c, out);
    else if (aug->parsed()) cmd_augment(c, out);
    else if (synth->parsed()) cmd_synth(c, out);
    else if (analyze->parsed()) cmd_analyze(c, out);
    else if (test->parsed()) cmd_test(c, out);
    else if (layers->parsed()) cmd_layers(c, out);
    else if (rep->parsed()) cmd_report(c, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hsprobe::cli
