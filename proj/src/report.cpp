#include "fairclust/report.hpp"

#include <filesystem>
#include <fstream>

#include "fairclust/errors.hpp"

namespace fairclust {

namespace {

namespace fs = std::filesystem;

void collect(std::vector<std::string>& problems, const std::string& message) {
  problems.push_back(message);
}

template <typename T>
T get_or(const Json& json, const std::string& key, const T& fallback,
         std::vector<std::string>& problems) {
  if (!json.contains(key)) return fallback;
  try {
    return json.at(key).get<T>();
  } catch (const Json::exception&) {
    collect(problems, "field '" + key + "' has the wrong type");
    return fallback;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

}  // namespace

RunConfig parse_run_config(const Json& json) {
  std::vector<std::string> problems;
  RunConfig config;

  config.train.seed = get_or<std::uint64_t>(json, "seed", config.train.seed, problems);
  config.train.k = get_or<int>(json, "k", config.train.k, problems);
  config.train.batch_size = get_or<int>(json, "batch_size", config.train.batch_size, problems);
  config.train.pretrain_epochs =
      get_or<int>(json, "pretrain_epochs", config.train.pretrain_epochs, problems);
  config.train.max_refine_epochs =
      get_or<int>(json, "max_refine_epochs", config.train.max_refine_epochs, problems);
  config.train.stop_tolerance =
      get_or<double>(json, "stop_tolerance", config.train.stop_tolerance, problems);
  config.train.shuffle = get_or<bool>(json, "shuffle", config.train.shuffle, problems);
  config.train.hidden = get_or<std::vector<int>>(json, "hidden", config.train.hidden, problems);
  config.train.learning_rate =
      get_or<double>(json, "learning_rate", config.train.learning_rate, problems);
  config.train.adam_beta1 = get_or<double>(json, "adam_beta1", config.train.adam_beta1, problems);
  config.train.adam_beta2 = get_or<double>(json, "adam_beta2", config.train.adam_beta2, problems);
  config.train.adam_epsilon =
      get_or<double>(json, "adam_epsilon", config.train.adam_epsilon, problems);
  config.train.weights.alpha = get_or<double>(json, "alpha", config.train.weights.alpha, problems);
  config.train.weights.beta = get_or<double>(json, "beta", config.train.weights.beta, problems);
  config.train.weights.gamma = get_or<double>(json, "gamma", config.train.weights.gamma, problems);
  config.train.weights.vat_epsilon =
      get_or<double>(json, "vat_epsilon", config.train.weights.vat_epsilon, problems);
  config.train.weights.vat_xi =
      get_or<double>(json, "vat_xi", config.train.weights.vat_xi, problems);
  config.train.weights.vat_power_iters =
      get_or<int>(json, "vat_power_iters", config.train.weights.vat_power_iters, problems);
  if (json.contains("fairness_relax") && !json.at("fairness_relax").is_null())
    config.train.fairness_relax =
        get_or<double>(json, "fairness_relax", 0.0, problems);

  config.standardize = get_or<bool>(json, "standardize", config.standardize, problems);
  if (json.contains("test_fraction") && !json.at("test_fraction").is_null())
    config.test_fraction = get_or<double>(json, "test_fraction", 0.25, problems);
  config.dump_embeddings =
      get_or<bool>(json, "dump_embeddings", config.dump_embeddings, problems);
  config.out_dir = get_or<std::string>(json, "out", config.out_dir, problems);

  if (!json.contains("dataset") || !json.at("dataset").is_object()) {
    collect(problems, "field 'dataset' (object) is required");
  } else {
    const Json& ds = json.at("dataset");
    config.dataset.type = get_or<std::string>(ds, "type", "", problems);
    if (config.dataset.type == "blobs") {
      config.dataset.n_per_blob = get_or<int>(ds, "n_per_blob", 500, problems);
      config.dataset.blobs = get_or<int>(ds, "blobs", config.train.k, problems);
      config.dataset.dim = get_or<int>(ds, "dim", 2, problems);
      config.dataset.psv_bias = get_or<double>(ds, "psv_bias", 0.9, problems);
      if (ds.contains("seed") && !ds.at("seed").is_null())
        config.dataset.seed = get_or<std::uint64_t>(ds, "seed", 0, problems);
      if (config.dataset.n_per_blob < 1) collect(problems, "dataset.n_per_blob must be positive");
      if (config.dataset.blobs < 1) collect(problems, "dataset.blobs must be positive");
      if (config.dataset.dim < 1) collect(problems, "dataset.dim must be positive");
      if (config.dataset.psv_bias < 0.0 || config.dataset.psv_bias > 1.0)
        collect(problems, "dataset.psv_bias must lie in [0, 1]");
    } else if (config.dataset.type == "csv") {
      config.dataset.path = get_or<std::string>(ds, "path", "", problems);
      config.dataset.schema.feature_columns =
          get_or<std::vector<std::string>>(ds, "features", {}, problems);
      config.dataset.schema.psv_column = get_or<std::string>(ds, "psv", "", problems);
      if (ds.contains("label") && !ds.at("label").is_null())
        config.dataset.schema.label_column = get_or<std::string>(ds, "label", "", problems);
      if (config.dataset.path.empty()) collect(problems, "dataset.path is required for csv");
      if (config.dataset.schema.feature_columns.empty())
        collect(problems, "dataset.features must name at least one column");
      if (config.dataset.schema.psv_column.empty())
        collect(problems, "dataset.psv must name the protected column");
    } else if (config.dataset.type == "fdcm") {
      config.dataset.features_path = get_or<std::string>(ds, "features", "", problems);
      config.dataset.groups_path = get_or<std::string>(ds, "groups", "", problems);
      if (ds.contains("labels") && !ds.at("labels").is_null())
        config.dataset.labels_path = get_or<std::string>(ds, "labels", "", problems);
      if (config.dataset.features_path.empty())
        collect(problems, "dataset.features path is required for fdcm");
      if (config.dataset.groups_path.empty())
        collect(problems, "dataset.groups path is required for fdcm");
    } else {
      collect(problems, "dataset.type must be one of: blobs, csv, fdcm");
    }
  }

  if (config.test_fraction && (*config.test_fraction <= 0.0 || *config.test_fraction >= 1.0))
    collect(problems, "test_fraction must lie strictly between 0 and 1");
  for (const std::string& p : config.train.problems()) collect(problems, p);

  if (!problems.empty()) {
    std::string message = "invalid configuration: ";
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i > 0) message += "; ";
      message += problems[i];
    }
    throw ConfigError(message);
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  Json json;
  try {
    in >> json;
  } catch (const Json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_run_config(json);
}

Json run_config_to_json(const RunConfig& config) {
  Json json{
      {"seed", config.train.seed},
      {"k", config.train.k},
      {"batch_size", config.train.batch_size},
      {"pretrain_epochs", config.train.pretrain_epochs},
      {"max_refine_epochs", config.train.max_refine_epochs},
      {"stop_tolerance", config.train.stop_tolerance},
      {"shuffle", config.train.shuffle},
      {"hidden", config.train.hidden},
      {"learning_rate", config.train.learning_rate},
      {"adam_beta1", config.train.adam_beta1},
      {"adam_beta2", config.train.adam_beta2},
      {"adam_epsilon", config.train.adam_epsilon},
      {"alpha", config.train.weights.alpha},
      {"beta", config.train.weights.beta},
      {"gamma", config.train.weights.gamma},
      {"vat_epsilon", config.train.weights.vat_epsilon},
      {"vat_xi", config.train.weights.vat_xi},
      {"vat_power_iters", config.train.weights.vat_power_iters},
      {"standardize", config.standardize},
      {"dump_embeddings", config.dump_embeddings},
      {"out", config.out_dir},
  };
  json["fairness_relax"] =
      config.train.fairness_relax ? Json(*config.train.fairness_relax) : Json(nullptr);
  json["test_fraction"] =
      config.test_fraction ? Json(*config.test_fraction) : Json(nullptr);

  Json ds{{"type", config.dataset.type}};
  if (config.dataset.type == "blobs") {
    ds["n_per_blob"] = config.dataset.n_per_blob;
    ds["blobs"] = config.dataset.blobs;
    ds["dim"] = config.dataset.dim;
    ds["psv_bias"] = config.dataset.psv_bias;
    ds["seed"] = config.dataset.seed ? Json(*config.dataset.seed) : Json(nullptr);
  } else if (config.dataset.type == "csv") {
    ds["path"] = config.dataset.path;
    ds["features"] = config.dataset.schema.feature_columns;
    ds["psv"] = config.dataset.schema.psv_column;
    ds["label"] = config.dataset.schema.label_column ? Json(*config.dataset.schema.label_column)
                                                     : Json(nullptr);
  } else if (config.dataset.type == "fdcm") {
    ds["features"] = config.dataset.features_path;
    ds["groups"] = config.dataset.groups_path;
    ds["labels"] =
        config.dataset.labels_path ? Json(*config.dataset.labels_path) : Json(nullptr);
  }
  json["dataset"] = ds;
  return json;
}

Dataset load_dataset(const DatasetSpec& spec, std::uint64_t default_seed) {
  if (spec.type == "blobs") {
    return make_biased_blobs(spec.n_per_blob, spec.blobs, spec.dim, spec.psv_bias,
                             spec.seed.value_or(default_seed));
  }
  if (spec.type == "csv") return load_csv(spec.path, spec.schema);
  if (spec.type == "fdcm") {
    Dataset data;
    data.features = load_matrix(spec.features_path);
    data.membership = load_membership_file(spec.groups_path);
    if (data.membership->size() != data.rows())
      throw IoError("groups file row count does not match features");
    if (spec.labels_path) {
      data.labels = load_int_column(*spec.labels_path);
      if (static_cast<int>(data.labels->size()) != data.rows())
        throw IoError("labels file row count does not match features");
    }
    for (int g = 0; g < data.membership->num_groups; ++g)
      data.group_names.push_back(std::to_string(g));
    data.name = spec.features_path;
    data.provenance = "fdcm:" + spec.features_path;
    return data;
  }
  throw ConfigError("unknown dataset type '" + spec.type + "'");
}

Json metrics_to_json(const MetricsReport& metrics) {
  Json json{
      {"balance", metrics.balance},
      {"fairness", metrics.fairness},
      {"balance_per_cluster", metrics.balance_per_cluster},
      {"fairness_per_cluster", metrics.fairness_per_cluster},
  };
  json["accuracy"] = metrics.accuracy ? Json(*metrics.accuracy) : Json(nullptr);
  json["nmi"] = metrics.nmi ? Json(*metrics.nmi) : Json(nullptr);
  return json;
}

void append_epoch_rows(std::string& csv, const TrainTrace& trace) {
  for (const EpochRecord& r : trace.epochs) {
    csv += r.phase;
    csv += ',';
    csv += std::to_string(r.epoch);
    csv += ',';
    csv += csv_number(r.loss) + ',' + csv_number(r.loss_clustering) + ',' +
           csv_number(r.loss_fairness) + ',' + csv_number(r.loss_augmentation) + ',';
    csv += (r.metrics.accuracy ? csv_number(*r.metrics.accuracy) : "") + ',';
    csv += (r.metrics.nmi ? csv_number(*r.metrics.nmi) : "") + ',';
    csv += csv_number(r.metrics.balance) + ',' + csv_number(r.metrics.fairness) + ',';
    csv += csv_number(r.assign_objective);
    csv += '\n';
  }
}

std::string write_run_report(const RunConfig& config, const TrainResult& result,
                             const PhaseTimings& timings,
                             const std::optional<MetricsReport>& test_metrics,
                             const std::vector<std::string>& warnings) {
  fs::create_directories(config.out_dir);
  const Json config_echo = run_config_to_json(config);
  // The run id is a content hash of the echo, so identical configs share it.
  const std::size_t run_id = std::hash<std::string>{}(config_echo.dump());

  std::string report;
  {
    Json line{{"record", "config"}, {"run_id", run_id}, {"config", config_echo}};
    report += line.dump() + "\n";
  }
  {
    Json line{{"record", "result"},
              {"run_id", run_id},
              {"status", "ok"},
              {"stopped_on_fairness", result.stopped_on_fairness},
              {"pretrain_epochs_run", result.pretrain_epochs_run},
              {"refine_epochs_run", result.refine_epochs_run},
              {"final", metrics_to_json(result.final_metrics)},
              {"final_fair", metrics_to_json(result.final_fair_metrics)},
              {"fair_objective", result.final_fair.objective}};
    if (test_metrics) line["test"] = metrics_to_json(*test_metrics);
    line["timings"] = Json{{"load_seconds", timings.load_seconds},
                           {"pretrain_seconds", timings.pretrain_seconds},
                           {"refine_seconds", timings.refine_seconds},
                           {"total_seconds", timings.total_seconds}};
    line["warnings"] = warnings;
    report += line.dump() + "\n";
  }
  {
    Json line{{"record", "artifacts"},
              {"run_id", run_id},
              {"labels", "labels.csv"},
              {"fair_labels", "fair_labels.csv"},
              {"model", "model.json"},
              {"epochs", "epochs.csv"}};
    if (config.dump_embeddings) line["embeddings"] = "embeddings.fdcm";
    report += line.dump() + "\n";
  }

  const std::string report_path = (fs::path(config.out_dir) / "report.jsonl").string();
  write_text(report_path, report);

  std::string csv =
      "phase,epoch,loss,loss_clustering,loss_fairness,loss_augmentation,"
      "accuracy,nmi,balance,fairness,assign_objective\n";
  append_epoch_rows(csv, result.trace);
  write_text((fs::path(config.out_dir) / "epochs.csv").string(), csv);

  save_int_column((fs::path(config.out_dir) / "labels.csv").string(), "label",
                  result.final_predictions.labels);
  save_int_column((fs::path(config.out_dir) / "fair_labels.csv").string(), "label",
                  result.final_fair.assignment.labels);
  save_model((fs::path(config.out_dir) / "model.json").string(), result.model);
  return report_path;
}

void write_failed_report(const std::string& out_dir, const Json& config_echo,
                         const std::string& error) {
  try {
    fs::create_directories(out_dir);
    std::string report;
    Json config_line{{"record", "config"}, {"config", config_echo}};
    report += config_line.dump() + "\n";
    Json result_line{{"record", "result"}, {"status", "failed"}, {"error", error}};
    report += result_line.dump() + "\n";
    write_text((fs::path(out_dir) / "report.jsonl").string(), report);
  } catch (...) {
    // Reporting must never mask the original failure.
  }
}

void save_model(const std::string& path, const Network& net) {
  Json layers = Json::array();
  for (const auto& layer : net.layers) {
    Json weight = Json::array();
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) row.push_back(layer.weight(r, c));
      weight.push_back(row);
    }
    Json bias = Json::array();
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) bias.push_back(layer.bias(i));
    layers.push_back(Json{{"weight", weight}, {"bias", bias}});
  }
  const Json json{{"format", "fairclust-model"},
                  {"version", 1},
                  {"input_dim", net.input_dim()},
                  {"output_dim", net.output_dim()},
                  {"layers", layers}};
  write_text(path, json.dump(2) + "\n");
}

Network load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path);
  Json json;
  try {
    in >> json;
  } catch (const Json::exception& e) {
    throw IoError("model " + path + " is not valid JSON: " + e.what());
  }
  if (json.value("format", "") != "fairclust-model")
    throw IoError("model " + path + " has an unknown format tag");
  Network net;
  for (const Json& layer_json : json.at("layers")) {
    DenseLayer layer;
    const auto& weight = layer_json.at("weight");
    const auto rows = static_cast<Eigen::Index>(weight.size());
    const auto cols = static_cast<Eigen::Index>(weight.at(0).size());
    layer.weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        layer.weight(r, c) = weight.at(static_cast<std::size_t>(r))
                                 .at(static_cast<std::size_t>(c))
                                 .get<double>();
    const auto& bias = layer_json.at("bias");
    layer.bias.resize(static_cast<Eigen::Index>(bias.size()));
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
      layer.bias(i) = bias.at(static_cast<std::size_t>(i)).get<double>();
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

}  // namespace fairclust
