#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hsprobe/augment.hpp"
#include "hsprobe/bundle.hpp"
#include "hsprobe/corpus.hpp"
#include "hsprobe/layerscan.hpp"
#include "hsprobe/stats.hpp"
#include "json.hpp"

// Pipeline subcommands over a run directory:
//   <run>/prepare  <run>/augment  <run>/synth  <run>/analyze
//   <run>/test     <run>/layers   <run>/reports
namespace hsprobe::cli {

struct RunConfig {
  std::filesystem::path run_dir;
  std::filesystem::path config_file;
  unsigned threads = 0;  // 0 = hardware concurrency; never persisted
  std::uint64_t seed = 0;
  bool overwrite = false;

  // prepare
  std::filesystem::path dataset;
  std::string format = "auto";
  corpus::SelectionCriteria criteria;
  bool allow_digits = false;

  // augment
  std::filesystem::path augment_input;  // default <run>/prepare/dataset.json
  std::filesystem::path rewrites;
  std::string endpoint_url;
  std::string endpoint_model;
  int min_interval_ms = 0;
  augment::AugmentOptions augment;
  std::string oversize = "truncate";

  // synth
  bundle::SynthConfig synth;

  // analyze
  std::filesystem::path bundle_dir;     // default <run>/synth/bundle
  std::filesystem::path analyze_input;  // default: latest dataset in the run
  bool include_self = false;
  std::size_t bins = 20;

  // test
  stats::PipelineOptions test;
  std::string center = "mean";

  // layers
  bool absolute_dif = false;
  std::size_t occurrence_first = 9;
  std::size_t occurrence_last = 16;

  // report
  std::vector<std::string> outputs{"heatmaps", "fig5_sheet", "histogram",
                                   "group_dif_charts", "tables"};
  std::string ramp_low = "#ffffff";
  std::string ramp_high = "#084594";
};

void cmd_prepare(const RunConfig& config, std::ostream& out);
void cmd_augment(const RunConfig& config, std::ostream& out);
void cmd_synth(const RunConfig& config, std::ostream& out);
void cmd_analyze(const RunConfig& config, std::ostream& out);
void cmd_test(const RunConfig& config, std::ostream& out);
void cmd_layers(const RunConfig& config, std::ostream& out);
void cmd_report(const RunConfig& config, std::ostream& out);

/// Parses arguments (argv[0] excluded), runs one subcommand and maps errors
/// to exit codes: 1 I/O, 2 validation, 3 capacity, 4 mismatch, 5 too little
/// data.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hsprobe::cli
