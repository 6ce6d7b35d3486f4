#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairclust/data.hpp"
#include "fairclust/train.hpp"

namespace fairclust {

using Json = nlohmann::json;

/// Where a run's data comes from: a seeded generator, a CSV file with column
/// roles, or a binary feature matrix with companion id files.
struct DatasetSpec {
  std::string type;  // "blobs", "csv" or "fdcm"

  // blobs
  int n_per_blob = 500;
  int blobs = 4;
  int dim = 2;
  double psv_bias = 0.9;
  std::optional<std::uint64_t> seed;  // defaults to the run seed

  // csv
  std::string path;
  CsvSchema schema;

  // fdcm
  std::string features_path;
  std::string groups_path;
  std::optional<std::string> labels_path;
};

/// Everything needed to reproduce a run bit for bit.
struct RunConfig {
  TrainConfig train;
  DatasetSpec dataset;
  bool standardize = true;
  std::optional<double> test_fraction;
  bool dump_embeddings = false;
  std::string out_dir = "fairclust-run";
};

/// Parses and validates; throws ConfigError listing every offending field.
RunConfig parse_run_config(const Json& json);
RunConfig load_run_config(const std::string& path);
Json run_config_to_json(const RunConfig& config);

Dataset load_dataset(const DatasetSpec& spec, std::uint64_t default_seed);

struct PhaseTimings {
  double load_seconds = 0.0;
  double pretrain_seconds = 0.0;
  double refine_seconds = 0.0;
  double total_seconds = 0.0;
};

Json metrics_to_json(const MetricsReport& metrics);

/// Writes report.jsonl (one self-contained record per line), epochs.csv,
/// labels.csv, fair_labels.csv and model.json under out_dir. Returns the
/// report path.
std::string write_run_report(const RunConfig& config, const TrainResult& result,
                             const PhaseTimings& timings,
                             const std::optional<MetricsReport>& test_metrics,
                             const std::vector<std::string>& warnings);

/// Best-effort partial report for a failed run.
void write_failed_report(const std::string& out_dir, const Json& config_echo,
                         const std::string& error);

void save_model(const std::string& path, const Network& net);
Network load_model(const std::string& path);

void append_epoch_rows(std::string& csv, const TrainTrace& trace);

}  // namespace fairclust
