#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairclust/fair_assign.hpp"

namespace fairclust {

/// Feature matrix plus optional protected groups and class labels. Immutable
/// after construction; group/label ids follow first appearance in the source.
struct Dataset {
  Matrix features;
  std::optional<GroupMembership> membership;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> group_names;
  std::vector<std::string> label_names;
  std::string name;
  std::string provenance;

  int rows() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

/// Column roles for CSV ingestion: named feature columns, one protected
/// column, optionally one class-label column.
struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string psv_column;
  std::optional<std::string> label_column;
};

/// Comma-separated UTF-8 with a header row, '.' decimal point, no quoting of
/// numeric cells. Cell errors report row and column; non-finite values are
/// rejected. Needs at least two distinct protected values.
Dataset load_csv(const std::string& path, const CsvSchema& schema);
void save_csv(const std::string& path, const Dataset& dataset);

/// Binary matrix container: magic "FDCM" | u16 LE version=1 | u32 LE rows |
/// u32 LE cols | rows*cols float64 LE, row-major. Round trips bit-exactly.
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& matrix);

/// Per-column location/scale with constant columns passed through unscaled.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd stddev;  // 1.0 for constant columns
  std::vector<bool> constant;

  Matrix apply(const Matrix& features) const;
};

/// Zero mean, unit population variance per column; constant columns are
/// flagged and left unscaled.
std::pair<Matrix, Standardizer> standardize(const Matrix& features);

/// K well-separated unit-covariance Gaussian blobs (centers equally spaced
/// on a circle in the first two dimensions), binary protected value drawn to
/// match the blob's parity with probability psv_bias. Labels are blob ids.
Dataset make_biased_blobs(int n_per_blob, int blobs, int dim, double psv_bias,
                          std::uint64_t seed);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  bool stratified = true;
  std::string warning;
};

/// Deterministic split stratified by the joint (label, group) cell; falls
/// back to an unstratified split with a warning when a stratum has fewer
/// than two rows.
SplitResult split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

/// Single-column helpers for the CLI file formats. CSV variants expect a
/// one-column file with a header; FDCM variants expect an Nx1 matrix.
std::vector<int> load_int_column(const std::string& path);
void save_int_column(const std::string& path, const std::string& header,
                     const std::vector<int>& values);
GroupMembership load_membership_file(const std::string& path);
Matrix load_soft_assignment_file(const std::string& path);

}  // namespace fairclust
