#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "fptune/dataset.hpp"
#include "fptune/error.hpp"

using namespace fptune;

namespace {

std::filesystem::path temp_path(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / "fptune_dataset_tests";
  std::filesystem::create_directories(dir);
  return dir / leaf;
}

// Integer values reachable by flooring a point of stratum s when [lo, hi+1)
// is cut into n equal parts.
std::pair<int, int> stratum_span(int s, int n, int lo, int hi) {
  const double width = (static_cast<double>(hi) - lo + 1) / n;
  const int first = static_cast<int>(std::floor(lo + s * width));
  const int last = static_cast<int>(std::ceil(lo + (s + 1) * width)) - 1;
  return {first, std::max(first, last)};
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("lhs strata are permutations per dimension") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n_vars = 1 + static_cast<int>(gen() % 6);
    const int n = 1 + static_cast<int>(gen() % 200);
    const auto strata = lhs_strata(n_vars, n, gen());
    REQUIRE(strata.size() == static_cast<std::size_t>(n));
    for (int d = 0; d < n_vars; ++d) {
      std::vector<int> col;
      for (const auto& row : strata) col.push_back(row[d]);
      std::sort(col.begin(), col.end());
      for (int k = 0; k < n; ++k) REQUIRE(col[k] == k);
    }
  }
}

TEST_CASE("lhs with one value per stratum gives permutations") {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto cfgs = lhs_configs(2, 4, 0, 3, seed);
    REQUIRE(cfgs.size() == 4);
    for (int d = 0; d < 2; ++d) {
      std::set<int> seen;
      for (const auto& c : cfgs) seen.insert(c[d]);
      CHECK(seen == std::set<int>{0, 1, 2, 3});
    }
  }
}

TEST_CASE("one-dimensional lhs hits every stratum once") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int lo = static_cast<int>(gen() % 10);
    const int hi = lo + static_cast<int>(gen() % 60);
    const int k = 1 + static_cast<int>(gen() % (hi - lo + 1));
    const auto seed = gen();
    const auto cfgs = lhs_configs(1, k, lo, hi, seed);
    const auto strata = lhs_strata(1, k, seed);
    std::vector<int> s;
    for (int i = 0; i < k; ++i) {
      const auto [first, last] = stratum_span(strata[i][0], k, lo, hi);
      REQUIRE(cfgs[i][0] >= first);
      REQUIRE(cfgs[i][0] <= last);
      REQUIRE(cfgs[i][0] <= hi);
      s.push_back(strata[i][0]);
    }
    std::sort(s.begin(), s.end());
    for (int i = 0; i < k; ++i) REQUIRE(s[i] == i);
  }
}

TEST_CASE("lhs values stay inside their stratum when strata outnumber values") {
  const int n = 100, lo = 2, hi = 52;
  const auto strata = lhs_strata(3, n, 5);
  const auto cfgs = lhs_configs(3, n, lo, hi, 5);
  for (int k = 0; k < n; ++k) {
    for (int d = 0; d < 3; ++d) {
      const auto [first, last] = stratum_span(strata[k][d], n, lo, hi);
      CHECK(cfgs[k][d] >= first);
      CHECK(cfgs[k][d] <= std::min(last, hi));
    }
  }
  CHECK(lhs_configs(3, n, lo, hi, 5) == cfgs);
  CHECK_THROWS_AS(lhs_configs(2, 4, 5, 4, 1), Error);
}

TEST_CASE("compute_error examples") {
  const std::vector<double> one{1.0}, two{2.0};
  CHECK(compute_error(two, one) == 1.0);
  CHECK(compute_error(one, one) == 0.0);
  const std::vector<double> nan_out{std::nan(""), 1.0}, ref{1.0, 1.0};
  CHECK(std::isinf(compute_error(nan_out, ref)));
  const std::vector<double> z{0.0}, tiny{1e-40};
  CHECK(compute_error(tiny, z) == doctest::Approx(1e-80 / 1e-60));
  CHECK_THROWS_AS(compute_error(one, ref), Error);
}

TEST_CASE("log error and class label") {
  CHECK(log_error(1e-10) == doctest::Approx(10.0));
  CHECK(log_error(0.0) == kLogErrorCap);
  CHECK(log_error(std::numeric_limits<double>::infinity()) == -kLogErrorCap);
  CHECK(log_error(1e-50) == kLogErrorCap);
  CHECK(error_class(0.95) == 1);
  CHECK(error_class(0.9) == 0);
  CHECK(error_class(1e-10) == 0);
  const auto s = sample_from_error({4, 5}, 1e-10);
  CHECK(s.log_err == doctest::Approx(10.0));
  CHECK(s.class_label == 0);
  CHECK(sample_from_error({4, 5}, 0.95).class_label == 1);
}

TEST_CASE("max precision samples have zero error") {
  const auto& b = get_benchmark("saxpy");
  const auto in = gen_input_set(b, 1);
  const auto s = make_sample(b, in, PrecisionConfig::uniform(3, 52));
  CHECK(s.error == 0.0);
  CHECK(s.class_label == 0);
  ErrorEvaluator eval(b, in);
  const PrecisionConfig c{7, 9, 4};
  CHECK(eval.error(c) == make_sample(b, in, c).error);
}

TEST_CASE("build_dataset is deterministic across thread counts") {
  const auto& b = get_benchmark("saxpy");
  const auto in = gen_input_set(b, parse_shape("200"), 4);
  const auto d1 = build_dataset(b, in, 64, 11, 2, 52, 1);
  const auto d4 = build_dataset(b, in, 64, 11, 2, 52, 4);
  CHECK(d1 == d4);
  CHECK(d1.size() == 64);
  const auto lhs = lhs_configs(3, 64, 2, 52, 11);
  for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(d1.samples[i].config == lhs[i]);
  const auto single = build_dataset(b, in, 1, 11);
  CHECK(single.size() == 1);
}

TEST_CASE("datasets round-trip through CSV") {
  Dataset ds;
  ds.benchmark = "saxpy";
  ds.input_seed = 3;
  ds.input_shape = parse_shape("100");
  ds.sampling_seed = 9;
  ds.samples.push_back(sample_from_error({2, 3, 4}, 0.1 / 3.0));
  ds.samples.push_back(sample_from_error({52, 52, 52}, 0.0));
  ds.samples.push_back(sample_from_error({2, 2, 2}, std::numeric_limits<double>::infinity()));
  const auto path = temp_path("three.csv");
  save_dataset(ds, path);
  const auto back = load_dataset(path);
  CHECK(back == ds);
  CHECK(std::isinf(back.samples[2].error));

  // Drop one column from the CSV.
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::vector<std::string> rows;
  while (std::getline(in, row)) rows.push_back(row.substr(0, row.rfind(',')));
  in.close();
  const auto broken = temp_path("broken.csv");
  {
    std::ofstream out(broken);
    out << header << "\n";
    for (const auto& r : rows) out << r << "\n";
  }
  std::filesystem::copy_file(metadata_path(path), metadata_path(broken),
                             std::filesystem::copy_options::overwrite_existing);
  try {
    load_dataset(broken);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }

  const auto orphan = temp_path("orphan.csv");
  std::filesystem::copy_file(path, orphan, std::filesystem::copy_options::overwrite_existing);
  std::filesystem::remove(metadata_path(orphan));
  CHECK_THROWS_AS(load_dataset(orphan), Error);
}

}  // TEST_SUITE
