#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unistd.h>

#include "oracles.hpp"
#include "zeitlin/harness.hpp"

using namespace zeitlin;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("zeitlin_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t format_error_offset(const fs::path& p) {
  try {
    read_snapshot(p);
  } catch (const FormatError& e) {
    return e.offset;
  }
  FAIL("expected a format error");
  return 0;
}

RunConfig small_config(const fs::path& out) {
  RunConfig cfg;
  cfg.N = 12;
  cfg.l_max = 8;
  cfg.steps = 20;
  cfg.snapshot_stride = 5;
  cfg.n_lat = 12;
  cfg.n_lon = 24;
  cfg.slope_s = {2, 8};
  cfg.slope_r = {3, 11};
  cfg.output = out;
  return cfg;
}

}  // namespace

TEST_CASE("config: defaults, overrides, unknown keys, ranges") {
  const RunConfig def = parse_config("{}");
  CHECK(def.N == 32);
  CHECK(def.h == 0.2);

  const RunConfig c = parse_config(R"({"N": 64, "seed": 18446744073709551615, "l_min": 1, "l_max": 5,
      "h": 0.1, "steps": 7, "snapshot_stride": 3, "slope_fit_s": [2, 9], "output": "x/y"})");
  CHECK(c.N == 64);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.l_min == 1);
  CHECK(c.steps == 7u);
  CHECK(c.slope_s.lo == 2);
  CHECK(c.slope_s.hi == 9);
  CHECK(c.output == fs::path("x/y"));

  const RunConfig back = parse_config(config_to_json(c));
  CHECK(back.seed == c.seed);
  CHECK(back.h == c.h);
  CHECK(back.slope_s.hi == 9);
  CHECK(back.output == c.output);

  CHECK_THROWS_AS(parse_config(R"({"N": 16, "colour": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"N": 16, "l_max": 16})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"l_min": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"h": -0.1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"steps": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"snapshot_stride": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"N": "big"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"slope_fit_r": [5]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"slope_fit_r": [9, 4]})"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/config.json"), IoError);
}

TEST_CASE("config: shipped reference configs") {
  const fs::path dir = fs::path(ZEITLIN_SOURCE_DIR) / "configs";
  const RunConfig a = load_config(dir / "config_a.json");
  const RunConfig b = load_config(dir / "config_b.json");
  CHECK(a.N == 128);
  CHECK(a.l_min == 2);
  CHECK(a.l_max == 10);
  CHECK(b.l_min == 1);
  CHECK(b.l_max == 10);
  CHECK(a.slope_s.lo == 3);
  CHECK(a.slope_r.hi == 50);
}

TEST_CASE("normal source: moments and determinism") {
  NormalSource a(42), b(42), c(43);
  double sum = 0, sq = 0;
  const int n = 200000;
  bool same = true, differs = false;
  for (int i = 0; i < n; ++i) {
    const double x = a.next();
    same &= x == b.next();
    differs |= x != c.next();
    sum += x;
    sq += x * x;
  }
  CHECK(same);
  CHECK(differs);
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.01);
}

TEST_CASE("gen_initial: degree support, momentum, determinism") {
  const QuantizedSphere sp{TruncationLevel(16)};
  RunConfig only1;
  only1.N = 16;
  only1.l_min = only1.l_max = 1;
  const SphericalCoefficients c1 = matrix_to_coeffs(gen_initial(only1, sp), sp.basis());
  double outside = 0, inside = 0;
  for (int l = 1; l < 16; ++l)
    for (int m = -l; m <= l; ++m) (l == 1 ? inside : outside) += std::norm(c1(l, m));
  CHECK(inside > 0.0);
  CHECK(std::sqrt(outside) <= 1e-13);

  RunConfig a;
  a.N = 16;
  const Matrix w = gen_initial(a, sp);
  CHECK(skew_defect(w) < 1e-14 * w.norm());
  CHECK(std::abs(w.trace()) < 1e-14 * w.norm());
  for (double l : invariants(w, 2, sp).L) CHECK(std::abs(l) <= 1e-13);
  CHECK(gen_initial(a, sp) == w);
  a.seed = 2;
  CHECK(gen_initial(a, sp) != w);

  // Draw order: c_l0 then (Re, Im) of c_lm for m = 1..l, l ascending.
  NormalSource src(a.seed = 5);
  a.l_min = 2;
  a.l_max = 3;
  const SphericalCoefficients c = matrix_to_coeffs(gen_initial(a, sp), sp.basis());
  for (int l = 2; l <= 3; ++l) {
    CHECK(c(l, 0).real() == doctest::Approx(src.next()).epsilon(1e-12));
    for (int m = 1; m <= l; ++m) {
      const double re = src.next(), im = src.next();
      CHECK(c(l, m).real() == doctest::Approx(re).epsilon(1e-12));
      CHECK(c(l, m).imag() == doctest::Approx(im).epsilon(1e-12));
    }
  }
  RunConfig wrong;
  wrong.N = 8;
  CHECK_THROWS_AS(gen_initial(wrong, sp), ConfigError);
}

TEST_CASE("snapshot: round trip and header layout") {
  TempDir tmp;
  const Matrix w = oracle::random_su(16, 4);
  const fs::path p = tmp.path / "a.zeit";
  write_snapshot(p, 987654321012ull, 13.25, w);
  const Snapshot s = read_snapshot(p);
  CHECK(s.step == 987654321012ull);
  CHECK(s.t_sim == 13.25);
  CHECK(s.W == w);
  const std::string bytes = slurp(p);
  CHECK(bytes.size() == kSnapshotHeaderBytes + 16u * 16u * 16u);
  CHECK(bytes.substr(0, 4) == "ZEIT");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[8]) == 16);
}

TEST_CASE("snapshot: golden file") {
  const fs::path golden = fs::path(ZEITLIN_SOURCE_DIR) / "tests" / "data" / "golden_n4.zeit";
  const std::string bytes = slurp(golden);
  REQUIRE(bytes.size() == 284u);
  CHECK(fnv1a(bytes) == 0x5bb0ab72c883e4aaull);
  const Snapshot s = read_snapshot(golden);
  CHECK(s.step == 123u);
  CHECK(s.t_sim == 24.6);
  CHECK(std::abs(s.W.norm() - 4.933542717966471) <= 1e-15 * 4.933542717966471);
  CHECK(s.W(0, 1) == Complex(-1.125, -0.1875));
  CHECK(s.W(2, 2) == Complex(0.0, -0.375));

  TempDir tmp;
  write_snapshot(tmp.path / "again.zeit", s.step, s.t_sim, s.W);
  CHECK(slurp(tmp.path / "again.zeit") == bytes);
}

TEST_CASE("snapshot: corrupt files name the offset") {
  TempDir tmp;
  const Matrix w = oracle::random_su(6, 2);
  const fs::path good = tmp.path / "good.zeit";
  write_snapshot(good, 3, 0.6, w);
  const std::string bytes = slurp(good);
  const fs::path bad = tmp.path / "bad.zeit";

  spit(bad, bytes.substr(0, 20));
  CHECK(format_error_offset(bad) == 20);
  spit(bad, bytes.substr(0, bytes.size() - 8));
  CHECK_THROWS_AS(read_snapshot(bad), FormatError);

  std::string m = bytes;
  m[0] = 'X';
  spit(bad, m);
  CHECK(format_error_offset(bad) == 0);
  m = bytes;
  m[4] = 9;
  spit(bad, m);
  CHECK(format_error_offset(bad) == 4);
  m = bytes;
  m[8] = 1;
  spit(bad, m);
  CHECK(format_error_offset(bad) == 8);

  m = bytes;
  const double inf = INFINITY;
  std::memcpy(&m[kSnapshotHeaderBytes + 16 * 7], &inf, 8);
  spit(bad, m);
  CHECK(format_error_offset(bad) == kSnapshotHeaderBytes + 16 * 7);

  m = bytes;
  const double big = 5.0;
  std::memcpy(&m[kSnapshotHeaderBytes + 16 * 1], &big, 8);  // breaks skew symmetry
  spit(bad, m);
  CHECK(format_error_offset(bad) == kSnapshotHeaderBytes);

  CHECK_THROWS_AS(read_snapshot(tmp.path / "missing.zeit"), IoError);
  CHECK_THROWS_AS(write_snapshot(tmp.path / "no" / "dir" / "x.zeit", 0, 0.0, w), IoError);
}

TEST_CASE("writers: series header, rows, PGM") {
  CHECK(series_header(4) == "step,t_sim,t_sec,H,Ens,C2,C3,C4,Lx,Ly,Lz,Hs,Hr,Es,Er,alpha,slope_s,slope_r");
  CHECK(series_header(2) == "step,t_sim,t_sec,H,Ens,C2,Lx,Ly,Lz,Hs,Hr,Es,Er,alpha,slope_s,slope_r");

  SeriesRow r;
  r.step = 7;
  r.t_sim = 1.4;
  r.inv.C = {2.0, 3.0};
  r.slope_s = NAN;
  const std::string row = format_series_row(r);
  CHECK(row.rfind("7,1.3999999999999999,0,", 0) == 0);
  CHECK(row.find(",nan,") != std::string::npos);
  CHECK(std::count(row.begin(), row.end(), ',') == 16);

  TempDir tmp;
  GridField zero = make_grid(4, 8);
  render_pgm(tmp.path / "z.pgm", zero);
  const std::string z = slurp(tmp.path / "z.pgm");
  const std::string head = "P5\n8 4\n255\n";
  REQUIRE(z.size() == head.size() + 32);
  CHECK(z.substr(0, head.size()) == head);
  for (std::size_t k = head.size(); k < z.size(); ++k) CHECK(static_cast<unsigned char>(z[k]) == 128);

  GridField ramp = make_grid(4, 8);
  for (std::size_t k = 0; k < ramp.values.size(); ++k) ramp.values[k] = static_cast<double>(k) - 16.0;
  render_pgm(tmp.path / "r.pgm", ramp);
  const std::string rb = slurp(tmp.path / "r.pgm");
  CHECK(static_cast<unsigned char>(rb[head.size()]) == 1);
  CHECK(static_cast<unsigned char>(rb[head.size() + 16]) == 128);
}

TEST_CASE("run_experiment: steps = 0") {
  TempDir tmp;
  RunConfig cfg = small_config(tmp.path / "zero");
  cfg.steps = 0;
  const ExperimentSummary s = run_experiment(cfg);
  CHECK(s.rows == 1);
  CHECK(s.snapshots == 1);
  CHECK(lines_of(cfg.output / "series.csv").size() == 2);
  CHECK(fs::exists(cfg.output / "snapshot_0.zeit"));
  CHECK(fs::exists(cfg.output / "Ws_0.pgm"));
}

TEST_CASE("run_experiment: N=32 smoke run") {
  TempDir tmp;
  RunConfig cfg;
  cfg.N = 32;
  cfg.steps = 200;
  cfg.snapshot_stride = 10;
  cfg.n_lat = 32;
  cfg.n_lon = 64;
  cfg.slope_r = {10, 31};
  cfg.output = tmp.path / "smoke";
  const ExperimentSummary s = run_experiment(cfg);
  CHECK(s.identity_failures.empty());
  CHECK(s.rows == 1 + cfg.steps / cfg.snapshot_stride);
  CHECK(s.snapshots == 3);

  const auto lines = lines_of(cfg.output / "series.csv");
  REQUIRE(lines.size() == 1 + s.rows);
  CHECK(lines[0] == series_header(cfg.k_max));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string step, t_sim, t_sec;
    std::getline(ss, step, ',');
    std::getline(ss, t_sim, ',');
    std::getline(ss, t_sec, ',');
    CHECK(std::stod(t_sec) == doctest::Approx(time_convert(std::stod(t_sim), TruncationLevel(32))).epsilon(1e-15));
  }
  for (const char* f : {"snapshot_0.zeit", "snapshot_100.zeit", "snapshot_200.zeit", "spectrum_200.csv",
                        "scatter_100.csv", "P_0.pgm", "W_200.pgm", "Wr_100.pgm"})
    CHECK(fs::exists(cfg.output / f));

  // Spectrum CSV: one row per degree, and the columns obey the cross-term identity.
  const auto spec = lines_of(cfg.output / "spectrum_200.csv");
  CHECK(spec[0] == "l,H,Hs,Hr");
  CHECK(spec.size() == 32u);
  double h = 0, hs = 0, hr = 0;
  for (std::size_t i = 1; i < spec.size(); ++i) {
    double l, a, b, c;
    REQUIRE(std::sscanf(spec[i].c_str(), "%lf,%lf,%lf,%lf", &l, &a, &b, &c) == 4);
    h += a;
    hs += b;
    hr += c;
  }
  CHECK(h == doctest::Approx(hs - hr).epsilon(1e-9));

  // Determinism.
  RunConfig again = cfg;
  again.output = tmp.path / "smoke2";
  run_experiment(again);
  CHECK(slurp(cfg.output / "series.csv") == slurp(again.output / "series.csv"));
}

TEST_CASE("run_experiment: resume reproduces the continuation") {
  TempDir tmp;
  RunConfig cfg = small_config(tmp.path / "full");
  cfg.steps = 20;
  run_experiment(cfg);

  RunConfig tail = cfg;
  tail.output = tmp.path / "tail";
  tail.steps = 10;
  run_experiment(tail, read_snapshot(cfg.output / "snapshot_10.zeit"));
  const Snapshot a = read_snapshot(cfg.output / "snapshot_20.zeit");
  const Snapshot b = read_snapshot(tail.output / "snapshot_20.zeit");
  CHECK(a.step == b.step);
  CHECK(a.t_sim == b.t_sim);
  CHECK(a.W == b.W);

  const auto full_rows = lines_of(cfg.output / "series.csv");
  const auto tail_rows = lines_of(tail.output / "series.csv");
  REQUIRE(tail_rows.size() == 4);
  CHECK(tail_rows.back() == full_rows.back());
  CHECK(tail_rows[1] == full_rows[3]);

  RunConfig other = cfg;
  other.N = 10;
  other.output = tmp.path / "other";
  CHECK_THROWS_AS(run_experiment(other, read_snapshot(cfg.output / "snapshot_10.zeit")), ConfigError);
}
