#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

#include "fairclust/data.hpp"
#include "fairclust/metrics.hpp"
#include "fairclust/net.hpp"
#include "fairclust/errors.hpp"

using namespace fairclust;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fairclust_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int value = 0;
    return value;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("csv loader: groups by first appearance") {
  TempDir dir;
  write_file(dir.file("tiny.csv"),
             "x,y,sex\n"
             "1.0,2.0,a\n"
             "3.5,-1.25,a\n"
             "0.0,4.0,b\n");
  const Dataset data = load_csv(dir.file("tiny.csv"), {{"x", "y"}, "sex", std::nullopt});
  CHECK(data.rows() == 3);
  CHECK(data.dim() == 2);
  REQUIRE(data.membership.has_value());
  CHECK(data.membership->num_groups == 2);
  const auto rho = data.membership->proportions();
  CHECK(rho[0] == doctest::Approx(2.0 / 3.0));
  CHECK(rho[1] == doctest::Approx(1.0 / 3.0));
  CHECK(data.group_names == std::vector<std::string>{"a", "b"});
  CHECK_FALSE(data.labels.has_value());
}

TEST_CASE("csv loader: located errors") {
  TempDir dir;
  write_file(dir.file("bad.csv"), "x,sex\n1.0,a\noops,b\n");
  CHECK_THROWS_WITH_AS(load_csv(dir.file("bad.csv"), {{"x"}, "sex", std::nullopt}),
                       doctest::Contains("row 2"), IoError);

  write_file(dir.file("nan.csv"), "x,sex\nnan,a\n2.0,b\n");
  CHECK_THROWS_AS(load_csv(dir.file("nan.csv"), {{"x"}, "sex", std::nullopt}), IoError);

  write_file(dir.file("missing.csv"), "x,sex\n1.0,a\n");
  CHECK_THROWS_WITH_AS(load_csv(dir.file("missing.csv"), {{"x", "z"}, "sex", std::nullopt}),
                       doctest::Contains("'z'"), IoError);

  write_file(dir.file("onegroup.csv"), "x,sex\n1.0,a\n2.0,a\n");
  CHECK_THROWS_AS(load_csv(dir.file("onegroup.csv"), {{"x"}, "sex", std::nullopt}), IoError);
}

TEST_CASE("csv round trip preserves values") {
  TempDir dir;
  Dataset data;
  data.features.resize(3, 2);
  data.features << 0.123456789012345, -7.25, 1e-7, 3.0, 2.5, -0.001953125;
  data.membership = GroupMembership::from_ids({0, 1, 0}, 2);
  data.labels = std::vector<int>{1, 0, 1};
  data.group_names = {"m", "f"};
  data.label_names = {"no", "yes"};
  save_csv(dir.file("round.csv"), data);
  const Dataset loaded =
      load_csv(dir.file("round.csv"), {{"f0", "f1"}, "group", std::string("label")});
  CHECK((loaded.features - data.features).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(loaded.membership->group == data.membership->group);
  // Ids follow first appearance, so compare the named values row by row.
  for (int r = 0; r < 3; ++r)
    CHECK(loaded.label_names[static_cast<std::size_t>(
              (*loaded.labels)[static_cast<std::size_t>(r)])] ==
          data.label_names[static_cast<std::size_t>(
              (*data.labels)[static_cast<std::size_t>(r)])]);
}

TEST_CASE("census-style schema loads and standardizes") {
  TempDir dir;
  write_file(dir.file("census.csv"),
             "age,fnlwgt,education-num,capitalgain,hours-per-week,gender,income\n"
             "39,77516,13,2174,40,Male,<=50K\n"
             "50,83311,13,0,13,Male,<=50K\n"
             "38,215646,9,0,40,Female,>50K\n"
             "53,234721,7,0,40,Female,<=50K\n");
  const Dataset data = load_csv(
      dir.file("census.csv"),
      {{"age", "fnlwgt", "education-num", "capitalgain", "hours-per-week"}, "gender",
       std::string("income")});
  CHECK(data.rows() == 4);
  CHECK(data.dim() == 5);
  CHECK(data.membership->num_groups == 2);
  REQUIRE(data.labels.has_value());
  CHECK(*data.labels == std::vector<int>{0, 0, 1, 0});
  const auto [scaled, scaler] = standardize(data.features);
  CHECK(std::abs(scaled.col(0).mean()) <= 1e-12);
}

TEST_CASE("binary matrix container round trips bit-exactly") {
  TempDir dir;
  Matrix m(2, 3);
  m << 1.0, -0.0, 3.141592653589793, 1e-300, -2.5e17, 0.1;
  save_matrix(dir.file("m.fdcm"), m);
  const Matrix back = load_matrix(dir.file("m.fdcm"));
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      // Bit-exact, signs of zero included.
      CHECK(std::memcmp(&m(r, c), &back(r, c), 8) == 0);
    }
}

TEST_CASE("binary matrix container rejects malformed files") {
  TempDir dir;
  write_file(dir.file("bad_magic.fdcm"), std::string("NOPE") + std::string(10, '\0'));
  CHECK_THROWS_WITH_AS(load_matrix(dir.file("bad_magic.fdcm")), doctest::Contains("magic"),
                       IoError);

  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  save_matrix(dir.file("trunc.fdcm"), m);
  std::ifstream in(dir.file("trunc.fdcm"), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  write_file(dir.file("trunc.fdcm"), bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_WITH_AS(load_matrix(dir.file("trunc.fdcm")),
                       doctest::Contains("expected 46 bytes, got 41"), IoError);
}

TEST_CASE("standardize: two-point column maps to -1, +1") {
  Matrix m(2, 1);
  m << 1.0, 3.0;
  const auto [scaled, scaler] = standardize(m);
  CHECK(scaled(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));  // population stddev
  CHECK(scaled(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardize: constant columns pass through flagged") {
  Matrix m(3, 2);
  m << 5.0, 1.0, 5.0, 2.0, 5.0, 3.0;
  const auto [scaled, scaler] = standardize(m);
  CHECK(scaler.constant[0]);
  CHECK_FALSE(scaler.constant[1]);
  CHECK(scaled(0, 0) == 5.0);
  CHECK(scaled(2, 0) == 5.0);
}

TEST_CASE("standardize is idempotent") {
  Rng rng(12);
  Matrix m(20, 3);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = 3.0 * rng.normal() + 2.0;
  const auto [once, s1] = standardize(m);
  const auto [twice, s2] = standardize(once);
  CHECK((twice - once).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("biased blobs: determinism and group proportions") {
  const Dataset a = make_biased_blobs(100, 4, 2, 0.5, 11);
  const Dataset b = make_biased_blobs(100, 4, 2, 0.5, 11);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.membership->group == b.membership->group);

  const auto rho = a.membership->proportions();
  CHECK(std::abs(rho[0] - 0.5) < 0.1);  // unbiased coin

  const Dataset c = make_biased_blobs(100, 4, 2, 0.5, 12);
  CHECK((a.features - c.features).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("biased blobs: full bias aliases blob parity") {
  const Dataset data = make_biased_blobs(50, 2, 2, 1.0, 3);
  // Ground-truth clustering (= blob identity) has a group missing from every
  // cluster, so its balance is 0.
  const HardAssignment truth_clusters{*data.labels, 2};
  CHECK(balance(truth_clusters, *data.membership).overall == 0.0);
}

TEST_CASE("biased blobs: blobs are well separated") {
  const Dataset data = make_biased_blobs(50, 4, 2, 0.9, 5);
  // Nearest center classifies every point correctly.
  std::vector<Eigen::RowVectorXd> centers(4, Eigen::RowVectorXd::Zero(2));
  std::vector<int> counts(4, 0);
  for (int i = 0; i < data.rows(); ++i) {
    centers[static_cast<std::size_t>((*data.labels)[static_cast<std::size_t>(i)])] +=
        data.features.row(i);
    ++counts[static_cast<std::size_t>((*data.labels)[static_cast<std::size_t>(i)])];
  }
  for (int b = 0; b < 4; ++b) centers[static_cast<std::size_t>(b)] /= counts[static_cast<std::size_t>(b)];
  int correct = 0;
  for (int i = 0; i < data.rows(); ++i) {
    int best = 0;
    for (int b = 1; b < 4; ++b)
      if ((data.features.row(i) - centers[static_cast<std::size_t>(b)]).norm() <
          (data.features.row(i) - centers[static_cast<std::size_t>(best)]).norm())
        best = b;
    if (best == (*data.labels)[static_cast<std::size_t>(i)]) ++correct;
  }
  CHECK(correct == data.rows());
}

TEST_CASE("split: exact sizes, matching proportions, determinism") {
  const Dataset data = make_biased_blobs(25, 4, 2, 0.7, 21);  // N = 100
  const SplitResult split_a = split(data, 0.25, 5);
  CHECK(split_a.train.rows() == 75);
  CHECK(split_a.test.rows() == 25);
  CHECK(split_a.stratified);

  const auto rho_full = data.membership->proportions();
  const auto rho_train = split_a.train.membership->proportions();
  const auto rho_test = split_a.test.membership->proportions();
  CHECK(std::abs(rho_train[0] - rho_full[0]) < 0.05);
  CHECK(std::abs(rho_test[0] - rho_full[0]) < 0.08);

  const SplitResult split_b = split(data, 0.25, 5);
  CHECK(split_a.test_indices == split_b.test_indices);
  CHECK_THROWS_AS(split(data, 0.0, 5), DomainError);
}

TEST_CASE("split: tiny stratum falls back to unstratified with a warning") {
  Dataset data;
  data.features.resize(10, 1);
  for (int i = 0; i < 10; ++i) data.features(i, 0) = i;
  data.membership = GroupMembership::from_ids({0, 0, 0, 0, 0, 0, 0, 0, 0, 1}, 2);
  data.labels = std::vector<int>(10, 0);
  const SplitResult result = split(data, 0.3, 1);
  CHECK_FALSE(result.stratified);
  CHECK(result.warning.find("stratum") != std::string::npos);
  CHECK(result.test.rows() == 3);
}

TEST_CASE("membership and soft-assignment files round trip through both formats") {
  TempDir dir;
  write_file(dir.file("groups.csv"), "group\nalpha\nbeta\nalpha\n");
  const GroupMembership m = load_membership_file(dir.file("groups.csv"));
  CHECK(m.group == std::vector<int>{0, 1, 0});

  Matrix one_hot(3, 2);
  one_hot << 1, 0, 0, 1, 1, 0;
  save_matrix(dir.file("groups.fdcm"), one_hot);
  const GroupMembership m2 = load_membership_file(dir.file("groups.fdcm"));
  CHECK(m2.group == std::vector<int>{0, 1, 0});

  Matrix soft(2, 3);
  soft << 0.5, 0.25, 0.25, 0.1, 0.2, 0.7;
  save_matrix(dir.file("soft.fdcm"), soft);
  CHECK((load_soft_assignment_file(dir.file("soft.fdcm")) - soft).cwiseAbs().maxCoeff() == 0.0);

  write_file(dir.file("soft.csv"), "y0,y1,y2\n0.5,0.25,0.25\n0.1,0.2,0.7\n");
  CHECK((load_soft_assignment_file(dir.file("soft.csv")) - soft).cwiseAbs().maxCoeff() <= 1e-15);
}
