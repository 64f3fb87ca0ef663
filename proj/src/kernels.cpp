#include "fptune/kernels.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fptune/error.hpp"
#include "fptune/flexnum.hpp"
#include "text_util.hpp"

namespace fptune {

std::string to_string(const PrecisionConfig& config) {
  std::string out = "[";
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(config[i]);
  }
  return out + "]";
}

std::string to_string(const InputShape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.dims.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape.dims[i]);
  }
  return out;
}

InputShape parse_shape(const std::string& text) {
  InputShape shape;
  for (auto part : text::split(text, 'x')) {
    auto v = text::parse_int<std::size_t>(part);
    if (!v) {
      throw Error(ErrorCode::kInvalidShape, "malformed shape '" + text + "'");
    }
    shape.dims.push_back(*v);
  }
  return shape;
}

namespace {

using Edges = std::vector<DependencyEdge>;

DependencyEdge assign(int src, int dst) {
  return {EdgeKind::kAssignment, {src}, dst};
}
DependencyEdge cast(std::vector<int> srcs, int dst) {
  return {EdgeKind::kCast, std::move(srcs), dst};
}

std::vector<BenchmarkDescriptor> make_registry() {
  std::vector<BenchmarkDescriptor> reg;
  reg.push_back({"fwt", 2, {"a", "t_butterfly"}, {assign(1, 0)}, {{1024}}});
  reg.push_back({"saxpy",
                 3,
                 {"x", "y", "t_axpy"},
                 {cast({0, 1}, 2), assign(2, 1)},
                 {{1024}}});
  reg.push_back({"convolution",
                 4,
                 {"image", "kernel", "t_mul", "acc"},
                 {cast({0, 1}, 2), assign(2, 3)},
                 {{64, 11}}});
  reg.push_back({"dwt",
                 7,
                 {"x", "h", "t_sum", "t_diff", "t_lo", "t_hi", "y"},
                 {assign(0, 6), cast({1, 2}, 4), cast({1, 3}, 5), assign(4, 6),
                  assign(5, 6)},
                 {{1024}}});
  reg.push_back({"correlation",
                 7,
                 {"data", "mean", "stddev", "t_center", "t_prod", "acc", "corr"},
                 {assign(0, 1), cast({0, 1}, 3), assign(4, 2), assign(4, 5),
                  assign(5, 6)},
                 {{16, 256}}});
  reg.push_back({"bscholes",
                 15,
                 {"spot", "strike", "rate", "vol", "maturity", "t_sqrt_t",
                  "t_log_sk", "t_vol_sqrt_t", "t_drift", "d1", "d2", "nd1",
                  "nd2", "t_discount", "call"},
                 {cast({0, 1}, 6), cast({3, 5}, 7), cast({2, 3, 4}, 8),
                  cast({6, 8, 7}, 9), cast({9, 7}, 10), cast({2, 4}, 13),
                  cast({0, 11, 1, 13, 12}, 14)},
                 {{256}}});
  reg.push_back({"jacobi",
                 25,
                 {"u", "u_new", "f", "c_n", "c_s", "c_e", "c_w", "h2", "omega",
                  "t_n", "t_s", "t_e", "t_w", "t_f", "t_ns", "t_ew", "t_nsew",
                  "t_sf", "t_d", "t_wd", "t_upd", "t_sq", "res", "bnd",
                  "rnorm"},
                 {cast({3, 0, 23}, 9), cast({4, 0, 23}, 10),
                  cast({5, 0, 23}, 11), cast({6, 0, 23}, 12), cast({7, 2}, 13),
                  cast({9, 10}, 14), cast({11, 12}, 15), cast({14, 15}, 16),
                  cast({16, 13}, 17), cast({17, 0}, 18), cast({8, 18}, 19),
                  cast({0, 19}, 20), assign(20, 1), assign(1, 0),
                  assign(21, 22), assign(22, 24)},
                 {{32, 50}}});
  return reg;
}

const std::vector<BenchmarkDescriptor>& registry() {
  static const std::vector<BenchmarkDescriptor> reg = make_registry();
  return reg;
}

bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

[[noreturn]] void bad_shape(const BenchmarkDescriptor& b, const InputShape& s,
                            const std::string& why) {
  throw Error(ErrorCode::kInvalidShape,
              b.name + ": invalid shape '" + to_string(s) + "': " + why);
}

// Per-run slot formats.
class Slots {
 public:
  explicit Slots(const PrecisionConfig& config) {
    formats_.reserve(config.size());
    for (int b : config.bits) formats_.push_back(FlexFormat{b, 11});
  }

  const FlexFormat& operator[](int slot) const { return formats_[slot]; }
  double q(int slot, double x) const {
    return round_to_format(x, formats_[slot]);
  }
  // Operands cast to the temporary `slot`, result rounded to it.
  double add(int slot, double a, double b) const {
    return flex_add(q(slot, a), q(slot, b), formats_[slot]);
  }
  double sub(int slot, double a, double b) const {
    return flex_sub(q(slot, a), q(slot, b), formats_[slot]);
  }
  double mul(int slot, double a, double b) const {
    return flex_mul(q(slot, a), q(slot, b), formats_[slot]);
  }
  double div(int slot, double a, double b) const {
    return flex_div(q(slot, a), q(slot, b), formats_[slot]);
  }

 private:
  std::vector<FlexFormat> formats_;
};

// ---------------------------------------------------------------------------
// Kernels. Each mirrors a plain binary64 implementation operation for
// operation, so the all-52 configuration reproduces it exactly.

// values: v[n]. Slots: 0 a, 1 t_butterfly.
std::vector<double> fwt(const InputSet& in, const Slots& s) {
  std::vector<double> a(in.values.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = s.q(0, in.values[i]);
  const std::size_t n = a.size();
  for (std::size_t h = 1; h < n; h *= 2) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double u = a[j];
        const double v = a[j + h];
        a[j] = s.q(0, s.add(1, u, v));
        a[j + h] = s.q(0, s.sub(1, u, v));
      }
    }
  }
  return a;
}

// values: a, x[n], y[n]. Slots: 0 x, 1 y, 2 t_axpy. The coefficient a is a
// literal of the axpy expression and is cast to its temporary.
std::vector<double> saxpy(const InputSet& in, const Slots& s) {
  const std::size_t n = in.shape.dims[0];
  const double a = in.values[0];
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = s.q(0, in.values[1 + i]);
    const double yi = s.q(1, in.values[1 + n + i]);
    const double prod = s.mul(2, a, xi);
    y[i] = s.q(1, s.add(2, prod, yi));
  }
  return y;
}

// values: image[side*side], kernel[k*k]. Valid-mode 2-D convolution.
// Slots: 0 image, 1 kernel, 2 t_mul, 3 acc.
std::vector<double> convolution(const InputSet& in, const Slots& s) {
  const std::size_t side = in.shape.dims[0];
  const std::size_t k = in.shape.dims[1];
  const std::size_t out_side = side - k + 1;
  std::vector<double> img(side * side), ker(k * k);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = s.q(0, in.values[i]);
  for (std::size_t i = 0; i < ker.size(); ++i) {
    ker[i] = s.q(1, in.values[side * side + i]);
  }
  std::vector<double> out(out_side * out_side);
  for (std::size_t r = 0; r < out_side; ++r) {
    for (std::size_t c = 0; c < out_side; ++c) {
      double acc = 0.0;
      for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t v = 0; v < k; ++v) {
          const double p = s.mul(2, img[(r + u) * side + (c + v)], ker[u * k + v]);
          acc = flex_add(acc, s.q(3, p), s[3]);
        }
      }
      out[r * out_side + c] = acc;
    }
  }
  return out;
}

// values: x[n]. Full-depth Haar decomposition, in place on y.
// Slots: 0 x, 1 h, 2 t_sum, 3 t_diff, 4 t_lo, 5 t_hi, 6 y.
std::vector<double> dwt(const InputSet& in, const Slots& s) {
  const std::size_t n = in.values.size();
  const double h = s.q(1, 1.0 / std::sqrt(2.0));
  std::vector<double> y(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = s.q(6, s.q(0, in.values[i]));
  for (std::size_t len = n; len >= 2; len /= 2) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const double sum = s.add(2, y[2 * i], y[2 * i + 1]);
      const double diff = s.sub(3, y[2 * i], y[2 * i + 1]);
      tmp[i] = s.q(6, s.mul(4, h, sum));
      tmp[half + i] = s.q(6, s.mul(5, h, diff));
    }
    for (std::size_t i = 0; i < len; ++i) y[i] = tmp[i];
  }
  return y;
}

// values: data[series*points], row major. Pearson correlation matrix.
// Slots: 0 data, 1 mean, 2 stddev, 3 t_center, 4 t_prod, 5 acc, 6 corr.
std::vector<double> correlation(const InputSet& in, const Slots& s) {
  const std::size_t m = in.shape.dims[0];
  const std::size_t p = in.shape.dims[1];
  const double count = static_cast<double>(p);
  std::vector<double> data(m * p);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = s.q(0, in.values[i]);

  std::vector<double> centered(m * p), stddev(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      mean = flex_add(mean, s.q(1, data[i * p + j]), s[1]);
    }
    mean = flex_div(mean, s.q(1, count), s[1]);
    double ss = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double c = s.sub(3, data[i * p + j], mean);
      centered[i * p + j] = c;
      ss = flex_add(ss, s.q(2, s.mul(4, c, c)), s[2]);
    }
    stddev[i] = s.q(2, std::sqrt(flex_div(ss, s.q(2, count), s[2])));
  }

  std::vector<double> corr(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = i; k < m; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double prod = s.mul(4, centered[i * p + j], centered[k * p + j]);
        acc = flex_add(acc, s.q(5, prod), s[5]);
      }
      const double den = flex_mul(s.q(6, stddev[i]), s.q(6, stddev[k]), s[6]);
      double r = flex_div(s.q(6, acc), den, s[6]);
      r = flex_div(r, s.q(6, count), s[6]);
      corr[i * m + k] = r;
      corr[k * m + i] = r;
    }
  }
  return corr;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// values: spot[n], strike[n], rate[n], vol[n], maturity[n]. European calls.
std::vector<double> bscholes(const InputSet& in, const Slots& s) {
  const std::size_t n = in.shape.dims[0];
  const double* v = in.values.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double spot = s.q(0, v[i]);
    const double strike = s.q(1, v[n + i]);
    const double rate = s.q(2, v[2 * n + i]);
    const double vol = s.q(3, v[3 * n + i]);
    const double mat = s.q(4, v[4 * n + i]);

    const double sqrt_t = s.q(5, std::sqrt(s.q(5, mat)));
    const double log_sk = s.q(6, std::log(s.div(6, spot, strike)));
    const double vol_sqrt_t = s.mul(7, vol, sqrt_t);
    double drift = s.mul(8, vol, vol);
    drift = s.mul(8, 0.5, drift);
    drift = s.add(8, rate, drift);
    drift = s.mul(8, drift, mat);
    const double d1 = s.q(9, s.div(9, s.add(9, log_sk, drift), vol_sqrt_t));
    const double d2 = s.q(10, s.sub(10, d1, vol_sqrt_t));
    const double nd1 = s.q(11, normal_cdf(d1));
    const double nd2 = s.q(12, normal_cdf(d2));
    const double disc = s.q(13, std::exp(-s.mul(13, rate, mat)));
    const double c1 = s.mul(14, spot, nd1);
    double c2 = s.mul(14, strike, disc);
    c2 = s.mul(14, c2, nd2);
    out[i] = s.q(14, s.sub(14, c1, c2));
  }
  return out;
}

// values: grid[(side+2)^2] (ring cells are the fixed boundary), f[side^2].
// Damped Jacobi sweeps for -lap(u) = f; outputs the interior grid followed by
// the RMS update norm of the last sweep.
std::vector<double> jacobi(const InputSet& in, const Slots& s) {
  enum : int {
    kU, kUNew, kF, kCn, kCs, kCe, kCw, kH2, kOmega, kTn, kTs, kTe, kTw, kTf,
    kTns, kTew, kTnsew, kTsf, kTd, kTwd, kTupd, kTsq, kRes, kBnd, kRnorm
  };
  const std::size_t n = in.shape.dims[0];
  const std::size_t iters = in.shape.dims[1];
  const std::size_t w = n + 2;
  const double cn = s.q(kCn, 0.25), cs = s.q(kCs, 0.25);
  const double ce = s.q(kCe, 0.25), cw = s.q(kCw, 0.25);
  const double h = 1.0 / static_cast<double>(n + 1);
  const double h2 = s.q(kH2, 0.25 * h * h);
  const double omega = s.q(kOmega, 0.8);

  std::vector<double> grid(w * w), next(w * w), f(n * n);
  for (std::size_t r = 0; r < w; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const bool ring = r == 0 || c == 0 || r == w - 1 || c == w - 1;
      grid[r * w + c] = s.q(ring ? kBnd : kU, in.values[r * w + c]);
    }
  }
  next = grid;
  for (std::size_t i = 0; i < n * n; ++i) f[i] = s.q(kF, in.values[w * w + i]);

  double res = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    res = 0.0;
    for (std::size_t r = 1; r <= n; ++r) {
      for (std::size_t c = 1; c <= n; ++c) {
        const double u = grid[r * w + c];
        const double tn = s.mul(kTn, cn, grid[(r - 1) * w + c]);
        const double ts = s.mul(kTs, cs, grid[(r + 1) * w + c]);
        const double te = s.mul(kTe, ce, grid[r * w + c + 1]);
        const double tw = s.mul(kTw, cw, grid[r * w + c - 1]);
        const double tf = s.mul(kTf, h2, f[(r - 1) * n + (c - 1)]);
        const double tns = s.add(kTns, tn, ts);
        const double tew = s.add(kTew, te, tw);
        const double tnsew = s.add(kTnsew, tns, tew);
        const double tsf = s.add(kTsf, tnsew, tf);
        const double td = s.sub(kTd, tsf, u);
        const double twd = s.mul(kTwd, omega, td);
        next[r * w + c] = s.q(kUNew, s.add(kTupd, u, twd));
        const double tsq = s.mul(kTsq, td, td);
        res = flex_add(res, s.q(kRes, tsq), s[kRes]);
      }
    }
    for (std::size_t r = 1; r <= n; ++r) {
      for (std::size_t c = 1; c <= n; ++c) {
        grid[r * w + c] = s.q(kU, next[r * w + c]);
      }
    }
  }

  std::vector<double> out;
  out.reserve(n * n + 1);
  for (std::size_t r = 1; r <= n; ++r) {
    for (std::size_t c = 1; c <= n; ++c) out.push_back(grid[r * w + c]);
  }
  const double cells = static_cast<double>(n * n);
  out.push_back(
      s.q(kRnorm, std::sqrt(s.div(kRnorm, res, cells))));
  return out;
}

std::size_t expected_values(const BenchmarkDescriptor& b, const InputShape& s) {
  const auto& d = s.dims;
  if (b.name == "fwt" || b.name == "dwt") return d[0];
  if (b.name == "saxpy") return 1 + 2 * d[0];
  if (b.name == "convolution") return d[0] * d[0] + d[1] * d[1];
  if (b.name == "correlation") return d[0] * d[1];
  if (b.name == "bscholes") return 5 * d[0];
  // jacobi
  return (d[0] + 2) * (d[0] + 2) + d[0] * d[0];
}

}  // namespace

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& b : registry()) out.push_back(b.name);
    return out;
  }();
  return names;
}

const BenchmarkDescriptor& get_benchmark(const std::string& name) {
  for (const auto& b : registry()) {
    if (b.name == name) return b;
  }
  throw Error(ErrorCode::kUnknownBenchmark, "unknown benchmark '" + name + "'");
}

const std::vector<DependencyEdge>& dependency_graph(
    const BenchmarkDescriptor& bench) {
  return bench.edges;
}

void validate_shape(const BenchmarkDescriptor& b, const InputShape& s) {
  constexpr std::size_t kMaxLen = std::size_t{1} << 22;
  const auto& d = s.dims;
  const auto need = [&](std::size_t n) {
    if (d.size() != n) {
      bad_shape(b, s, "expected " + std::to_string(n) + " dimension(s)");
    }
  };
  if (b.name == "fwt" || b.name == "dwt") {
    need(1);
    if (!is_pow2(d[0]) || d[0] > kMaxLen) {
      bad_shape(b, s, "length must be a power of two in [2, 2^22]");
    }
  } else if (b.name == "saxpy") {
    need(1);
    if (d[0] < 1 || d[0] > kMaxLen) bad_shape(b, s, "length must be in [1, 2^22]");
  } else if (b.name == "convolution") {
    need(2);
    if (d[1] < 1 || d[0] < d[1] || d[0] > 4096) {
      bad_shape(b, s, "need 1 <= kernel side <= matrix side <= 4096");
    }
  } else if (b.name == "correlation") {
    need(2);
    if (d[0] < 2 || d[1] < 2 || d[0] * d[1] > kMaxLen) {
      bad_shape(b, s, "need >= 2 series and >= 2 points");
    }
  } else if (b.name == "bscholes") {
    need(1);
    if (d[0] < 1 || d[0] > kMaxLen) bad_shape(b, s, "options must be in [1, 2^22]");
  } else if (b.name == "jacobi") {
    need(2);
    if (d[0] < 2 || d[0] > 2048) bad_shape(b, s, "grid side must be in [2, 2048]");
    if (d[1] < 1) bad_shape(b, s, "iterations must be >= 1");
  } else {
    throw Error(ErrorCode::kUnknownBenchmark, "unknown benchmark '" + b.name + "'");
  }
}

InputSet gen_input_set(const BenchmarkDescriptor& bench,
                       const InputShape& shape, std::uint64_t seed) {
  validate_shape(bench, shape);
  InputSet in{bench.name, {}, seed, shape};
  std::mt19937_64 rng(seed);
  const auto draw = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const std::size_t total = expected_values(bench, shape);
  in.values.reserve(total);
  if (bench.name == "bscholes") {
    const std::size_t n = shape.dims[0];
    const double ranges[5][2] = {
        {10.0, 100.0}, {10.0, 100.0}, {0.01, 0.05}, {0.1, 0.5}, {0.25, 2.0}};
    for (const auto& r : ranges) {
      for (std::size_t i = 0; i < n; ++i) in.values.push_back(draw(r[0], r[1]));
    }
  } else {
    for (std::size_t i = 0; i < total; ++i) in.values.push_back(draw(0.1, 10.0));
  }
  return in;
}

std::vector<double> run_kernel(const BenchmarkDescriptor& bench,
                               const InputSet& input,
                               const PrecisionConfig& config) {
  if (config.size() != static_cast<std::size_t>(bench.n_var)) {
    throw Error(ErrorCode::kConfigLengthMismatch,
                bench.name + ": config has " + std::to_string(config.size()) +
                    " entries, expected " + std::to_string(bench.n_var));
  }
  for (int b : config.bits) {
    if (b < FlexFormat::kMinMantissa || b > FlexFormat::kMaxMantissa) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mantissa width out of range: " + to_string(config));
    }
  }
  validate_shape(bench, input.shape);
  if (input.values.size() != expected_values(bench, input.shape)) {
    throw Error(ErrorCode::kInvalidShape,
                bench.name + ": input has " + std::to_string(input.values.size()) +
                    " values, shape " + to_string(input.shape) + " needs " +
                    std::to_string(expected_values(bench, input.shape)));
  }
  const Slots slots(config);
  if (bench.name == "fwt") return fwt(input, slots);
  if (bench.name == "saxpy") return saxpy(input, slots);
  if (bench.name == "convolution") return convolution(input, slots);
  if (bench.name == "dwt") return dwt(input, slots);
  if (bench.name == "correlation") return correlation(input, slots);
  if (bench.name == "bscholes") return bscholes(input, slots);
  return jacobi(input, slots);
}

std::vector<double> run_reference(const BenchmarkDescriptor& bench,
                                  const InputSet& input) {
  return run_kernel(bench, input,
                    PrecisionConfig::uniform(bench.n_var, FlexFormat::kMaxMantissa));
}

void save_input_set(const InputSet& input, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "benchmark=" << input.benchmark << ",shape=" << to_string(input.shape)
      << ",seed=" << input.seed << "\n";
  for (double v : input.values) out << text::format_double(v) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

InputSet load_input_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  const auto fail = [&](std::size_t line, const std::string& why) {
    throw Error(ErrorCode::kParse,
                path.string() + ":" + std::to_string(line) + ":1: " + why);
  };
  std::string line;
  if (!std::getline(in, line)) fail(1, "missing header");
  InputSet set;
  bool has_bench = false, has_shape = false, has_seed = false;
  for (auto field : text::split(line, ',')) {
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) fail(1, "malformed header field");
    const auto key = field.substr(0, eq);
    const std::string value(field.substr(eq + 1));
    if (key == "benchmark") {
      set.benchmark = value;
      has_bench = true;
    } else if (key == "shape") {
      set.shape = parse_shape(value);
      has_shape = true;
    } else if (key == "seed") {
      auto s = text::parse_int<std::uint64_t>(value);
      if (!s) fail(1, "bad seed");
      set.seed = *s;
      has_seed = true;
    }
  }
  if (!has_bench || !has_shape || !has_seed) {
    fail(1, "header needs benchmark, shape and seed");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto v = text::parse_double(line);
    if (!v || !std::isfinite(*v)) fail(lineno, "expected a finite number");
    set.values.push_back(*v);
  }
  const auto& bench = get_benchmark(set.benchmark);
  validate_shape(bench, set.shape);
  if (set.values.size() != expected_values(bench, set.shape)) {
    fail(lineno, "value count does not match shape");
  }
  return set;
}

}  // namespace fptune
