#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "fptune/dataset.hpp"
#include "fptune/error.hpp"
#include "fptune/kernels.hpp"
#include "oracles.hpp"

using namespace fptune;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

InputSet input_for(const std::string& name, const std::string& shape, std::uint64_t seed) {
  return gen_input_set(get_benchmark(name), parse_shape(shape), seed);
}

std::filesystem::path temp_path(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / "fptune_kernel_tests";
  std::filesystem::create_directories(dir);
  return dir / leaf;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("registry exposes the seven benchmarks with their arities") {
  const std::map<std::string, int> expected{{"fwt", 2},         {"saxpy", 3},
                                            {"convolution", 4}, {"dwt", 7},
                                            {"correlation", 7}, {"bscholes", 15},
                                            {"jacobi", 25}};
  CHECK(benchmark_names().size() == expected.size());
  for (const auto& [name, n] : expected) {
    const auto& b = get_benchmark(name);
    CHECK(b.n_var == n);
    CHECK(b.slot_names.size() == static_cast<std::size_t>(n));
  }
  CHECK(code_of([] { get_benchmark("fft"); }) == ErrorCode::kUnknownBenchmark);
}

TEST_CASE("dependency graphs are well formed") {
  for (const auto& name : benchmark_names()) {
    CAPTURE(name);
    const auto& b = get_benchmark(name);
    std::set<int> cast_targets, assign_dests;
    for (const auto& e : dependency_graph(b)) {
      CHECK(e.destination >= 0);
      CHECK(e.destination < b.n_var);
      CHECK_FALSE(e.sources.empty());
      for (int s : e.sources) {
        CHECK(s >= 0);
        CHECK(s < b.n_var);
        CHECK(s != e.destination);
      }
      if (e.kind == EdgeKind::kCast) {
        CHECK(cast_targets.insert(e.destination).second);
      } else {
        assign_dests.insert(e.destination);
      }
    }
    for (int t : cast_targets) CHECK(assign_dests.count(t) == 0);
  }
}

TEST_CASE("saxpy follows the V1 = V2 + V3 pattern") {
  const auto& edges = get_benchmark("saxpy").edges;
  bool cast = false, assign = false;
  for (const auto& e : edges) {
    if (e.kind == EdgeKind::kCast && e.destination == 2) {
      cast = std::set<int>(e.sources.begin(), e.sources.end()) == std::set<int>{0, 1};
    }
    if (e.kind == EdgeKind::kAssignment && e.destination == 1) {
      assign = e.sources == std::vector<int>{2};
    }
  }
  CHECK(cast);
  CHECK(assign);
  for (const auto& e : get_benchmark("fwt").edges) {
    CHECK(e.destination <= 1);
    for (int s : e.sources) CHECK(s <= 1);
  }
}

TEST_CASE("input generation is seeded and validated") {
  const auto& b = get_benchmark("saxpy");
  const auto a1 = gen_input_set(b, parse_shape("1000"), 7);
  const auto a2 = gen_input_set(b, parse_shape("1000"), 7);
  const auto a3 = gen_input_set(b, parse_shape("1000"), 8);
  CHECK(a1 == a2);
  CHECK(a1.values != a3.values);
  CHECK(a1.values.size() == 2001);
  CHECK(code_of([] { input_for("jacobi", "1x10", 3); }) == ErrorCode::kInvalidShape);
  CHECK(code_of([] { input_for("fwt", "1000", 3); }) == ErrorCode::kInvalidShape);
  CHECK(code_of([] { input_for("convolution", "4x5", 3); }) == ErrorCode::kInvalidShape);
  CHECK(code_of([] { input_for("saxpy", "4x5", 3); }) == ErrorCode::kInvalidShape);
  CHECK(to_string(parse_shape("64x11")) == "64x11");
  CHECK_THROWS_AS(parse_shape("64x"), Error);
  for (const auto& name : benchmark_names()) {
    const auto& bench = get_benchmark(name);
    CHECK_NOTHROW(validate_shape(bench, bench.default_input_shape));
  }
}

TEST_CASE("saxpy hand example") {
  InputSet in{"saxpy", {2.0, 1.0, 2.0, 1.0, 1.0}, 0, InputShape{{2}}};
  const auto out = run_kernel(get_benchmark("saxpy"), in, {52, 52, 52});
  CHECK(out == std::vector<double>{3.0, 5.0});
}

TEST_CASE("config validation") {
  const auto& b = get_benchmark("saxpy");
  const auto in = gen_input_set(b, 1);
  CHECK(code_of([&] { run_kernel(b, in, {52, 52}); }) == ErrorCode::kConfigLengthMismatch);
  CHECK_THROWS_AS(run_kernel(b, in, {0, 52, 52}), Error);
  CHECK_THROWS_AS(run_kernel(b, in, {53, 52, 52}), Error);
}

TEST_CASE("full precision matches independent binary64 implementations") {
  SUBCASE("saxpy") {
    const auto in = input_for("saxpy", "257", 3);
    const std::size_t n = 257;
    std::vector<double> x(in.values.begin() + 1, in.values.begin() + 1 + n);
    std::vector<double> y(in.values.begin() + 1 + n, in.values.end());
    CHECK(run_reference(get_benchmark("saxpy"), in) == oracle::saxpy(in.values[0], x, y));
  }
  SUBCASE("fwt") {
    const auto in = input_for("fwt", "64", 3);
    CHECK(oracle::max_rel_diff(run_reference(get_benchmark("fwt"), in),
                               oracle::walsh_hadamard(in.values), 1.0) < 1e-13);
  }
  SUBCASE("convolution") {
    const auto in = input_for("convolution", "12x3", 3);
    std::vector<double> img(in.values.begin(), in.values.begin() + 144);
    std::vector<double> ker(in.values.begin() + 144, in.values.end());
    CHECK(oracle::max_rel_diff(run_reference(get_benchmark("convolution"), in),
                               oracle::convolution_valid(img, 12, ker, 3)) < 1e-13);
  }
  SUBCASE("dwt") {
    const auto in = input_for("dwt", "128", 3);
    CHECK(oracle::max_rel_diff(run_reference(get_benchmark("dwt"), in),
                               oracle::haar(in.values), 1.0) < 1e-13);
  }
  SUBCASE("correlation") {
    const auto in = input_for("correlation", "5x40", 3);
    const auto ref = run_reference(get_benchmark("correlation"), in);
    CHECK(oracle::max_rel_diff(ref, oracle::pearson(in.values, 5, 40), 1.0) < 1e-12);
    for (std::size_t i = 0; i < 5; ++i) CHECK(ref[i * 5 + i] == doctest::Approx(1.0));
  }
  SUBCASE("bscholes") {
    const auto in = input_for("bscholes", "50", 3);
    const auto ref = run_reference(get_benchmark("bscholes"), in);
    std::vector<double> expect;
    const double* v = in.values.data();
    for (int i = 0; i < 50; ++i) {
      expect.push_back(oracle::black_scholes_call(v[i], v[50 + i], v[100 + i],
                                                  v[150 + i], v[200 + i]));
    }
    // Deep out-of-the-money prices cancel, so compare against a price scale of 1.
    CHECK(oracle::max_rel_diff(ref, expect, 1.0) < 1e-10);
  }
  SUBCASE("jacobi") {
    const auto in = input_for("jacobi", "6x12", 3);
    std::vector<double> grid(in.values.begin(), in.values.begin() + 64);
    std::vector<double> f(in.values.begin() + 64, in.values.end());
    CHECK(oracle::max_rel_diff(run_reference(get_benchmark("jacobi"), in),
                               oracle::jacobi(grid, f, 6, 12, 0.8)) < 1e-12);
  }
}

TEST_CASE("all-52 configs reproduce the reference bit for bit") {
  for (const auto& name : benchmark_names()) {
    CAPTURE(name);
    const auto& b = get_benchmark(name);
    InputShape shape = b.default_input_shape;
    if (name == "convolution") shape = parse_shape("16x5");
    if (name == "jacobi") shape = parse_shape("8x5");
    const auto in = gen_input_set(b, shape, 5);
    const auto ref = run_reference(b, in);
    const auto out = run_kernel(b, in, PrecisionConfig::uniform(b.n_var, 52));
    CHECK(out == ref);
    CHECK(compute_error(out, ref) == 0.0);
    CHECK(run_kernel(b, in, PrecisionConfig::uniform(b.n_var, 7)) ==
          run_kernel(b, in, PrecisionConfig::uniform(b.n_var, 7)));
  }
}

TEST_CASE("saxpy slot semantics match explicit rounding") {
  // Slot 2 is the axpy temporary: a and x are cast to it, the product and the
  // sum are rounded to it, and the result is assigned to y's slot.
  const auto in = input_for("saxpy", "64", 9);
  const std::size_t n = 64;
  for (int m2 = 1; m2 <= 6; ++m2) {
    for (int m1 : {3, 6}) {
      const int m0 = 5;
      const auto out = run_kernel(get_benchmark("saxpy"), in, {m0, m1, m2});
      auto r = [](double v, int m) { return oracle::round_enumerated(v, m, 11); };
      for (std::size_t i = 0; i < n; ++i) {
        const double x = r(in.values[1 + i], m0);
        const double y = r(in.values[1 + n + i], m1);
        const double prod = r(r(in.values[0], m2) * r(x, m2), m2);
        const double expect = r(r(prod + r(y, m2), m2), m1);
        REQUIRE(out[i] == expect);
      }
    }
  }
}

TEST_CASE("bscholes at minimum precision has a large-error element") {
  const auto& b = get_benchmark("bscholes");
  const auto in = gen_input_set(b, 1);
  const auto ref = run_reference(b, in);
  const auto out = run_kernel(b, in, PrecisionConfig::uniform(b.n_var, 2));
  double worst = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    worst = std::max(worst, (out[i] - ref[i]) * (out[i] - ref[i]) /
                                std::max(ref[i] * ref[i], 1e-60));
  }
  CHECK(worst > 0.9);
}

TEST_CASE("input sets round-trip through files") {
  const auto in = input_for("convolution", "8x3", 4);
  const auto path = temp_path("conv_input.txt");
  save_input_set(in, path);
  CHECK(load_input_set(path) == in);

  const auto bad = temp_path("bad_input.txt");
  {
    std::ofstream out(bad);
    out << "benchmark=saxpy,shape=2,seed=1\n1\n2\nnot-a-number\n4\n5\n";
  }
  try {
    load_input_set(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
  CHECK(code_of([] { load_input_set(temp_path("missing.txt")); }) == ErrorCode::kIo);
}

}  // TEST_SUITE
