#include "fairclust/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fairclust/errors.hpp"
#include "fairclust/net.hpp"

namespace fairclust {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end)
    throw IoError("unparsable numeric cell at row " + std::to_string(row) + " column '" +
                  column + "': '" + cell + "'");
  if (!std::isfinite(value))
    throw IoError("non-finite value at row " + std::to_string(row) + " column '" + column + "'");
  return value;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

void append_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw IoError(path + " is empty");
  const auto header = split_cells(lines[0]);
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) index[trim(header[c])] = c;

  auto find_column = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw IoError(path + " is missing column '" + name + "'");
    return it->second;
  };

  std::vector<std::size_t> feature_cols;
  for (const auto& name : schema.feature_columns) feature_cols.push_back(find_column(name));
  const std::size_t psv_col = find_column(schema.psv_column);
  std::optional<std::size_t> label_col;
  if (schema.label_column) label_col = find_column(*schema.label_column);

  Dataset data;
  const std::size_t n = lines.size() - 1;
  if (n == 0) throw IoError(path + " has no data rows");
  data.features.resize(static_cast<Eigen::Index>(n),
                       static_cast<Eigen::Index>(feature_cols.size()));
  std::vector<int> groups(n), labels(n);
  std::map<std::string, int> group_ids, label_ids;

  for (std::size_t r = 0; r < n; ++r) {
    const auto cells = split_cells(lines[r + 1]);
    if (cells.size() < header.size())
      throw IoError("row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                    " cells, header has " + std::to_string(header.size()));
    for (std::size_t f = 0; f < feature_cols.size(); ++f)
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
          parse_double(cells[feature_cols[f]], r + 1, schema.feature_columns[f]);
    const std::string g = trim(cells[psv_col]);
    auto [git, inserted] = group_ids.emplace(g, static_cast<int>(data.group_names.size()));
    if (inserted) data.group_names.push_back(g);
    groups[r] = git->second;
    if (label_col) {
      const std::string lv = trim(cells[*label_col]);
      auto [lit, linserted] = label_ids.emplace(lv, static_cast<int>(data.label_names.size()));
      if (linserted) data.label_names.push_back(lv);
      labels[r] = lit->second;
    }
  }

  if (data.group_names.size() < 2)
    throw IoError(path + " has fewer than 2 protected groups");
  data.membership =
      GroupMembership::from_ids(std::move(groups), static_cast<int>(data.group_names.size()));
  if (label_col) data.labels = std::move(labels);
  data.name = path;
  data.provenance = "csv:" + path;
  return data;
}

void save_csv(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  for (int c = 0; c < dataset.dim(); ++c) out << "f" << c << ",";
  out << "group";
  if (dataset.labels) out << ",label";
  out << "\n";
  for (int r = 0; r < dataset.rows(); ++r) {
    for (int c = 0; c < dataset.dim(); ++c) out << dataset.features(r, c) << ",";
    const int g = dataset.membership ? dataset.membership->group[static_cast<std::size_t>(r)] : 0;
    if (g < static_cast<int>(dataset.group_names.size()))
      out << dataset.group_names[static_cast<std::size_t>(g)];
    else
      out << "g" << g;
    if (dataset.labels) {
      const int l = (*dataset.labels)[static_cast<std::size_t>(r)];
      if (l < static_cast<int>(dataset.label_names.size()))
        out << "," << dataset.label_names[static_cast<std::size_t>(l)];
      else
        out << "," << l;
    }
    out << "\n";
  }
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 14)
    throw IoError(path + ": truncated header, expected 14 bytes, got " +
                  std::to_string(bytes.size()));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, "FDCM", 4) != 0) throw IoError(path + ": bad magic, expected FDCM");
  const std::uint16_t version = read_u16(p + 4);
  if (version != 1) throw IoError(path + ": unsupported version " + std::to_string(version));
  const std::uint64_t rows = read_u32(p + 6);
  const std::uint64_t cols = read_u32(p + 10);
  if (cols != 0 && rows > (std::numeric_limits<std::uint64_t>::max() / 8) / cols)
    throw IoError(path + ": dimension overflow");
  const std::uint64_t payload = rows * cols * 8;
  if (bytes.size() != 14 + payload)
    throw IoError(path + ": expected " + std::to_string(14 + payload) + " bytes, got " +
                  std::to_string(bytes.size()));

  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const unsigned char* cursor = p + 14;
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      double value;
      std::memcpy(&value, cursor, 8);
      cursor += 8;
      if (!std::isfinite(value))
        throw IoError(path + ": non-finite value at row " + std::to_string(r) + " column " +
                      std::to_string(c));
      out(r, c) = value;
    }
  return out;
}

void save_matrix(const std::string& path, const Matrix& matrix) {
  if (matrix.rows() > static_cast<Eigen::Index>(std::numeric_limits<std::uint32_t>::max()) ||
      matrix.cols() > static_cast<Eigen::Index>(std::numeric_limits<std::uint32_t>::max()))
    throw IoError("matrix too large for the container format");
  std::string bytes;
  bytes.reserve(14 + static_cast<std::size_t>(matrix.size()) * 8);
  bytes.append("FDCM");
  append_u16(bytes, 1);
  append_u32(bytes, static_cast<std::uint32_t>(matrix.rows()));
  append_u32(bytes, static_cast<std::uint32_t>(matrix.cols()));
  for (Eigen::Index r = 0; r < matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      const double value = matrix(r, c);
      char buffer[8];
      std::memcpy(buffer, &value, 8);
      bytes.append(buffer, 8);
    }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Matrix Standardizer::apply(const Matrix& features) const {
  if (features.cols() != mean.size()) throw DomainError("standardizer dimension mismatch");
  Matrix out = features;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    if (constant[static_cast<std::size_t>(c)]) continue;
    out.col(c) = (out.col(c).array() - mean(c)) / stddev(c);
  }
  return out;
}

std::pair<Matrix, Standardizer> standardize(const Matrix& features) {
  if (features.rows() < 2) throw DomainError("standardization needs at least two rows");
  Standardizer scaler;
  scaler.mean = features.colwise().mean();
  scaler.stddev.resize(features.cols());
  scaler.constant.assign(static_cast<std::size_t>(features.cols()), false);
  const auto n = static_cast<double>(features.rows());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double variance =
        (features.col(c).array() - scaler.mean(c)).square().sum() / n;  // population
    const double sd = std::sqrt(variance);
    if (sd < 1e-12) {
      scaler.constant[static_cast<std::size_t>(c)] = true;
      scaler.stddev(c) = 1.0;
    } else {
      scaler.stddev(c) = sd;
    }
  }
  return {scaler.apply(features), scaler};
}

Dataset make_biased_blobs(int n_per_blob, int blobs, int dim, double psv_bias,
                          std::uint64_t seed) {
  if (n_per_blob < 1 || blobs < 1 || dim < 1) throw DomainError("blob parameters must be positive");
  if (psv_bias < 0.0 || psv_bias > 1.0) throw DomainError("psv_bias must lie in [0, 1]");

  const int n = n_per_blob * blobs;
  Dataset data;
  data.features.resize(n, dim);
  std::vector<int> groups(static_cast<std::size_t>(n));
  std::vector<int> labels(static_cast<std::size_t>(n));

  // Centers far apart relative to the unit covariance.
  std::vector<Eigen::RowVectorXd> centers;
  for (int b = 0; b < blobs; ++b) {
    Eigen::RowVectorXd center = Eigen::RowVectorXd::Zero(dim);
    if (blobs > 1) {
      if (dim >= 2) {
        const double radius = 6.0 / std::sin(M_PI / blobs);
        const double angle = 2.0 * M_PI * b / blobs;
        center(0) = radius * std::cos(angle);
        center(1) = radius * std::sin(angle);
      } else {
        center(0) = 12.0 * b;
      }
    }
    centers.push_back(center);
  }

  Rng feature_rng(Rng::mix(seed, 0xB10B, 1));
  Rng group_rng(Rng::mix(seed, 0xB10B, 2));
  int row = 0;
  for (int b = 0; b < blobs; ++b) {
    for (int i = 0; i < n_per_blob; ++i, ++row) {
      for (int c = 0; c < dim; ++c)
        data.features(row, c) = centers[static_cast<std::size_t>(b)](c) + feature_rng.normal();
      labels[static_cast<std::size_t>(row)] = b;
      const int parity = b % 2;
      const bool match = group_rng.uniform() < psv_bias;
      groups[static_cast<std::size_t>(row)] = match ? parity : 1 - parity;
    }
  }

  data.membership = GroupMembership::from_ids(std::move(groups), 2);
  data.labels = std::move(labels);
  data.group_names = {"0", "1"};
  for (int b = 0; b < blobs; ++b) data.label_names.push_back(std::to_string(b));
  data.name = "biased_blobs";
  data.provenance = "blobs(n_per_blob=" + std::to_string(n_per_blob) +
                    ",blobs=" + std::to_string(blobs) + ",dim=" + std::to_string(dim) +
                    ",psv_bias=" + std::to_string(psv_bias) + ",seed=" + std::to_string(seed) + ")";
  return data;
}

namespace {

Dataset take_rows(const Dataset& dataset, const std::vector<int>& rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), dataset.features.cols());
  std::vector<int> groups, labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = dataset.features.row(rows[i]);
    if (dataset.membership)
      groups.push_back(dataset.membership->group[static_cast<std::size_t>(rows[i])]);
    if (dataset.labels) labels.push_back((*dataset.labels)[static_cast<std::size_t>(rows[i])]);
  }
  if (dataset.membership)
    out.membership = GroupMembership::from_ids(std::move(groups), dataset.membership->num_groups);
  if (dataset.labels) out.labels = std::move(labels);
  out.group_names = dataset.group_names;
  out.label_names = dataset.label_names;
  out.name = dataset.name;
  out.provenance = dataset.provenance;
  return out;
}

void shuffle_indices(std::vector<int>& indices, Rng& rng) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(indices[i - 1], indices[j]);
  }
}

}  // namespace

SplitResult split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0)
    throw DomainError("test fraction must lie strictly between 0 and 1");
  const int n = dataset.rows();
  const auto total_test =
      static_cast<int>(std::llround(test_fraction * static_cast<double>(n)));

  // Strata over the joint (label, group) cell, falling back gracefully when a
  // field is absent.
  std::map<std::pair<int, int>, std::vector<int>> strata;
  for (int i = 0; i < n; ++i) {
    const int label = dataset.labels ? (*dataset.labels)[static_cast<std::size_t>(i)] : 0;
    const int group =
        dataset.membership ? dataset.membership->group[static_cast<std::size_t>(i)] : 0;
    strata[{label, group}].push_back(i);
  }

  SplitResult result;
  bool stratified = true;
  for (const auto& [key, rows] : strata)
    if (rows.size() < 2) stratified = false;

  std::vector<int> test_rows;
  if (!stratified) {
    result.stratified = false;
    result.warning = "a stratum has fewer than 2 rows; falling back to an unstratified split";
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    Rng rng(Rng::mix(seed, 0x5B117, 0));
    shuffle_indices(all, rng);
    test_rows.assign(all.begin(), all.begin() + total_test);
  } else {
    // Largest-remainder allocation hits the exact total deterministically.
    std::vector<std::pair<double, const std::vector<int>*>> remainders;
    std::vector<std::vector<int>*> ordered;
    int allocated = 0;
    std::vector<std::pair<int, std::vector<int>>> shuffled;
    std::size_t stratum_index = 0;
    std::vector<double> fractions;
    std::vector<std::vector<int>> rows_by_stratum;
    for (auto& [key, rows] : strata) {
      auto copy = rows;
      Rng rng(Rng::mix(seed, 0x5B117, stratum_index + 1));
      shuffle_indices(copy, rng);
      const double ideal = test_fraction * static_cast<double>(copy.size());
      const int base = static_cast<int>(std::floor(ideal));
      fractions.push_back(ideal - base);
      rows_by_stratum.push_back(std::move(copy));
      allocated += base;
      ++stratum_index;
    }
    std::vector<std::size_t> order(fractions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return fractions[a] > fractions[b];
    });
    std::vector<int> counts(fractions.size());
    for (std::size_t s = 0; s < fractions.size(); ++s)
      counts[s] = static_cast<int>(
          std::floor(test_fraction * static_cast<double>(rows_by_stratum[s].size())));
    for (std::size_t rank = 0; allocated < total_test && rank < order.size(); ++rank) {
      ++counts[order[rank]];
      ++allocated;
    }
    for (std::size_t s = 0; s < rows_by_stratum.size(); ++s)
      for (int i = 0; i < counts[s] && i < static_cast<int>(rows_by_stratum[s].size()); ++i)
        test_rows.push_back(rows_by_stratum[s][static_cast<std::size_t>(i)]);
  }

  std::vector<bool> in_test(static_cast<std::size_t>(n), false);
  for (int i : test_rows) in_test[static_cast<std::size_t>(i)] = true;
  for (int i = 0; i < n; ++i)
    (in_test[static_cast<std::size_t>(i)] ? result.test_indices : result.train_indices)
        .push_back(i);
  result.train = take_rows(dataset, result.train_indices);
  result.test = take_rows(dataset, result.test_indices);
  return result;
}

std::vector<int> load_int_column(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".fdcm") {
    const Matrix m = load_matrix(path);
    if (m.cols() != 1) throw IoError(path + ": expected a single column");
    std::vector<int> out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, 0);
      if (v != std::floor(v)) throw IoError(path + ": non-integral id at row " + std::to_string(r));
      out.push_back(static_cast<int>(v));
    }
    return out;
  }
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw IoError(path + " has no data rows");
  std::vector<int> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (trim(lines[r]).empty()) continue;
    const double v = parse_double(trim(lines[r]), r, trim(lines[0]));
    if (v != std::floor(v)) throw IoError(path + ": non-integral id at row " + std::to_string(r));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void save_int_column(const std::string& path, const std::string& header,
                     const std::vector<int>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << header << "\n";
  for (int v : values) out << v << "\n";
}

GroupMembership load_membership_file(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".fdcm") {
    const Matrix m = load_matrix(path);
    if (m.cols() == 1) {
      return GroupMembership::from_ids(load_int_column(path));
    }
    // One-hot rows.
    std::vector<int> ids;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      int hit = -1;
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(r, c) == 1.0) {
          if (hit != -1) throw IoError(path + ": row " + std::to_string(r) + " has two groups");
          hit = static_cast<int>(c);
        } else if (m(r, c) != 0.0) {
          throw IoError(path + ": row " + std::to_string(r) + " is not one-hot");
        }
      }
      if (hit == -1) throw IoError(path + ": row " + std::to_string(r) + " has no group");
      ids.push_back(hit);
    }
    return GroupMembership::from_ids(std::move(ids), static_cast<int>(m.cols()));
  }
  // CSV: single column of tokens, first-appearance group ids.
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw IoError(path + " has no data rows");
  std::vector<int> ids;
  std::map<std::string, int> seen;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::string token = trim(lines[r]);
    if (token.empty()) continue;
    auto [it, inserted] = seen.emplace(token, static_cast<int>(seen.size()));
    ids.push_back(it->second);
  }
  return GroupMembership::from_ids(std::move(ids), static_cast<int>(seen.size()));
}

Matrix load_soft_assignment_file(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".fdcm") return load_matrix(path);
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw IoError(path + " has no data rows");
  const auto header = split_cells(lines[0]);
  Matrix out(static_cast<Eigen::Index>(lines.size() - 1),
             static_cast<Eigen::Index>(header.size()));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_cells(lines[r]);
    if (cells.size() != header.size())
      throw IoError(path + ": row " + std::to_string(r) + " has " +
                    std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c)
      out(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
          parse_double(cells[c], r, header[c]);
  }
  return out;
}

}  // namespace fairclust
