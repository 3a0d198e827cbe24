#include "zeitlin/harness.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace zeitlin {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------- config

void RunConfig::validate() const {
  if (N < 2) throw ConfigError("N must be >= 2");
  if (l_min < 1 || l_min > l_max || l_max > N - 1)
    throw ConfigError("need 1 <= l_min <= l_max <= N-1, got l_min=" + std::to_string(l_min) +
                      " l_max=" + std::to_string(l_max) + " N=" + std::to_string(N));
  if (!(h > 0.0)) throw ConfigError("h must be positive");
  if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  if (!(fp_tol > 0.0)) throw ConfigError("fp_tol must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (k_max < 2) throw ConfigError("k_max must be >= 2");
  if (n_lat < 4 || n_lon < 4) throw ConfigError("grid must be at least 4x4");
  if (slope_s.lo >= slope_s.hi || slope_r.lo >= slope_r.hi || slope_s.lo < 1 || slope_r.lo < 1)
    throw ConfigError("slope fit ranges need 1 <= lo < hi");
}

namespace {

template <typename T>
T take(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

DegreeRange take_range(const json& j, const char* key, DegreeRange fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw ConfigError(std::string("config key '") + key + "' must be [lo, hi]");
  return {v[0].get<int>(), v[1].get<int>()};
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"N",     "seed",     "l_min",     "l_max",       "h",
                                          "steps", "snapshot_stride", "fp_tol", "max_iters",   "k_max",
                                          "n_lat", "n_lon",    "slope_fit_s", "slope_fit_r", "output"};
  return keys;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");

  RunConfig c;
  c.N = take(j, "N", c.N);
  c.seed = take(j, "seed", c.seed);
  c.l_min = take(j, "l_min", c.l_min);
  c.l_max = take(j, "l_max", c.l_max);
  c.h = take(j, "h", c.h);
  const auto steps = take<long long>(j, "steps", static_cast<long long>(c.steps));
  const auto stride = take<long long>(j, "snapshot_stride", static_cast<long long>(c.snapshot_stride));
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  c.steps = static_cast<std::size_t>(steps);
  c.snapshot_stride = static_cast<std::size_t>(stride);
  c.fp_tol = take(j, "fp_tol", c.fp_tol);
  c.max_iters = take(j, "max_iters", c.max_iters);
  c.k_max = take(j, "k_max", c.k_max);
  c.n_lat = take(j, "n_lat", c.n_lat);
  c.n_lon = take(j, "n_lon", c.n_lon);
  c.slope_s = take_range(j, "slope_fit_s", c.slope_s);
  c.slope_r = take_range(j, "slope_fit_r", c.slope_r);
  c.output = take<std::string>(j, "output", c.output.string());
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j{{"N", c.N},
         {"seed", c.seed},
         {"l_min", c.l_min},
         {"l_max", c.l_max},
         {"h", c.h},
         {"steps", c.steps},
         {"snapshot_stride", c.snapshot_stride},
         {"fp_tol", c.fp_tol},
         {"max_iters", c.max_iters},
         {"k_max", c.k_max},
         {"n_lat", c.n_lat},
         {"n_lon", c.n_lon},
         {"slope_fit_s", {c.slope_s.lo, c.slope_s.hi}},
         {"slope_fit_r", {c.slope_r.lo, c.slope_r.hi}},
         {"output", c.output.string()}};
  return j.dump(2);
}

// ---------------------------------------------------------------- initial data

double NormalSource::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double NormalSource::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Matrix gen_initial(const RunConfig& cfg, const QuantizedSphere& sphere) {
  cfg.validate();
  if (cfg.N != sphere.size()) throw ConfigError("config N does not match the quantized sphere");
  NormalSource rng(cfg.seed);
  SphericalCoefficients c(cfg.l_max);
  for (int l = cfg.l_min; l <= cfg.l_max; ++l) {
    c(l, 0) = rng.next();
    for (int m = 1; m <= l; ++m) {
      const double re = rng.next();
      const double im = rng.next();
      c(l, m) = Complex(re, im);
      c(l, -m) = ((m % 2 == 0) ? 1.0 : -1.0) * Complex(re, -im);
    }
  }
  return coeffs_to_matrix(c, sphere.basis());
}

// ---------------------------------------------------------------- snapshots

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xffu));
}

template <typename T>
T get_le(const std::vector<unsigned char>& buf, std::size_t off) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(buf[off + i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(const fs::path& path, std::uint64_t step, double t_sim, const Matrix& w) {
  if (w.rows() != w.cols() || w.rows() < 2) throw DimensionError("write_snapshot: W must be square, N >= 2");
  const auto n = static_cast<std::uint32_t>(w.rows());
  std::vector<unsigned char> buf;
  buf.reserve(kSnapshotHeaderBytes + static_cast<std::size_t>(n) * n * 16);
  buf.insert(buf.end(), {'Z', 'E', 'I', 'T'});
  put_le(buf, kSnapshotVersion);
  put_le(buf, n);
  put_le(buf, step);
  put_le(buf, t_sim);
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < n; ++c) {
      put_le(buf, w(r, c).real());
      put_le(buf, w(r, c).imag());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Snapshot read_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (buf.size() < kSnapshotHeaderBytes) throw FormatError(where + "truncated header", buf.size());
  if (std::memcmp(buf.data(), "ZEIT", 4) != 0) throw FormatError(where + "bad magic", 0);
  const auto version = get_le<std::uint32_t>(buf, 4);
  if (version != kSnapshotVersion) throw FormatError(where + "unsupported version " + std::to_string(version), 4);
  const auto n = get_le<std::uint32_t>(buf, 8);
  if (n < 2 || n > 65536) throw FormatError(where + "invalid N " + std::to_string(n), 8);
  const std::size_t expected = kSnapshotHeaderBytes + static_cast<std::size_t>(n) * n * 16;
  if (buf.size() != expected)
    throw FormatError(where + "payload size " + std::to_string(buf.size()) + " != expected " + std::to_string(expected),
                      std::min(buf.size(), expected));

  Snapshot s;
  s.step = get_le<std::uint64_t>(buf, 12);
  s.t_sim = get_le<double>(buf, 20);
  s.W.resize(n, n);
  std::size_t off = kSnapshotHeaderBytes;
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < n; ++c) {
      const double re = get_le<double>(buf, off);
      const double im = get_le<double>(buf, off + 8);
      if (!std::isfinite(re) || !std::isfinite(im)) throw FormatError(where + "non-finite entry", off);
      s.W(r, c) = Complex(re, im);
      off += 16;
    }
  }
  const double norm = s.W.norm();
  if (skew_defect(s.W) > 1e-12 * norm) throw FormatError(where + "payload is not skew-Hermitian", kSnapshotHeaderBytes);
  if (std::abs(s.W.trace()) > 1e-12 * norm) throw FormatError(where + "payload is not trace-free", kSnapshotHeaderBytes);
  return s;
}

// ---------------------------------------------------------------- CSV / PGM

std::vector<std::string> series_columns(int k_max) {
  std::vector<std::string> cols{"step", "t_sim", "t_sec", "H", "Ens"};
  for (int k = 2; k <= k_max; ++k) cols.push_back("C" + std::to_string(k));
  for (const char* c : {"Lx", "Ly", "Lz", "Hs", "Hr", "Es", "Er", "alpha", "slope_s", "slope_r"}) cols.emplace_back(c);
  return cols;
}

std::string series_header(int k_max) {
  std::string out;
  for (const auto& c : series_columns(k_max)) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_series_row(const SeriesRow& r) {
  std::string out = std::to_string(r.step);
  auto add = [&](double v) {
    out += ',';
    out += num(v);
  };
  add(r.t_sim);
  add(r.t_sec);
  add(r.inv.H);
  add(r.inv.Ens);
  for (double c : r.inv.C) add(c);
  for (double l : r.inv.L) add(l);
  add(r.split.Hs);
  add(r.split.Hr);
  add(r.split.Es);
  add(r.split.Er);
  add(r.split.alpha);
  add(r.slope_s);
  add(r.slope_r);
  return out;
}

void emit_spectrum_csv(const fs::path& path, const SpectraTriple& s) {
  auto out = open_out(path);
  out << "l,H,Hs,Hr\n";
  for (std::size_t i = 0; i < s.H.H_of_l.size(); ++i) {
    const int l = s.H.H_of_l[i].first;
    out << l << ',' << num(s.H.H_of_l[i].second) << ',' << num(s.Hs.at(l)) << ',' << num(s.Hr.at(l)) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void emit_scatter_csv(const fs::path& path, const std::vector<ScatterPoint>& points) {
  auto out = open_out(path);
  out << "p,ws,weight\n";
  for (const auto& pt : points) out << num(pt.p) << ',' << num(pt.ws) << ',' << num(pt.weight) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void render_pgm(const fs::path& path, const GridField& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << f.n_lon << ' ' << f.n_lat << "\n255\n";
  const double m = f.max_abs();
  std::vector<unsigned char> px(f.values.size());
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double g = m > 0.0 ? 128.0 + 127.0 * f.values[k] / m : 128.0;
    px[k] = static_cast<unsigned char>(std::lround(std::clamp(g, 0.0, 255.0)));
  }
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------- orchestration

SampleAnalysis analyze_sample(const Matrix& w, std::uint64_t step, double t_sim, const RunConfig& cfg,
                              const QuantizedSphere& sphere) {
  SampleAnalysis a;
  a.state = split(w, sphere.laplacian());
  a.row.step = step;
  a.row.t_sim = t_sim;
  a.row.t_sec = time_convert(t_sim, sphere.level());
  a.row.inv = invariants(w, cfg.k_max, sphere);
  a.row.split = split_diagnostics(a.state, sphere.laplacian());
  a.spectra.H = energy_spectrum(w, sphere.basis());
  a.spectra.Hs = energy_spectrum(a.state.Ws, sphere.basis());
  a.spectra.Hr = energy_spectrum(a.state.Wr, sphere.basis());
  auto slope = [](const Spectrum& s, DegreeRange r) {
    try {
      return fit_slope(s, r.lo, r.hi).slope;
    } catch (const InsufficientData&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  a.row.slope_s = slope(a.spectra.Hs, cfg.slope_s);
  a.row.slope_r = slope(a.spectra.Hr, cfg.slope_r);
  return a;
}

GridField render_field(const SplitState& state, RenderField which, int n_lat, int n_lon, const QuantizedBasis& basis) {
  const Matrix* m = nullptr;
  switch (which) {
    case RenderField::W: m = &state.W; break;
    case RenderField::P: m = &state.P; break;
    case RenderField::Ws: m = &state.Ws; break;
    case RenderField::Wr: m = &state.Wr; break;
  }
  return synthesize_grid(matrix_to_coeffs(*m, basis), n_lat, n_lon);
}

ExperimentSummary run_experiment(const RunConfig& cfg, const std::optional<Snapshot>& resume) {
  cfg.validate();
  const QuantizedSphere sphere{TruncationLevel(cfg.N)};

  Matrix w0;
  std::uint64_t first = 0;
  double t0 = 0.0;
  if (resume) {
    if (resume->W.rows() != cfg.N) throw ConfigError("resume snapshot N does not match config N");
    w0 = resume->W;
    first = resume->step;
    t0 = resume->t_sim;
  } else {
    w0 = gen_initial(cfg, sphere);
  }

  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output.string() + ": " + ec.message());

  auto series = open_out(cfg.output / "series.csv");
  series << series_header(cfg.k_max) << '\n';

  const std::set<std::uint64_t> samples{first, first + cfg.steps / 2, first + cfg.steps};
  ExperimentSummary summary;

  const char* stage = "analysis";
  auto sample = [&](std::size_t step, double t, const Matrix& w) {
    stage = "analysis";
    const SampleAnalysis a = analyze_sample(w, step, t, cfg, sphere);
    stage = "output";
    series << format_series_row(a.row) << '\n';
    if (!series) throw IoError("write failed: series.csv");
    ++summary.rows;
    for (const auto& f : check_split_identities(a.row.split, cfg.N))
      summary.identity_failures.push_back("step " + std::to_string(step) + ": " + f);

    if (!samples.count(step)) return;
    const std::string tag = std::to_string(step);
    write_snapshot(cfg.output / ("snapshot_" + tag + ".zeit"), step, t, w);
    ++summary.snapshots;
    emit_spectrum_csv(cfg.output / ("spectrum_" + tag + ".csv"), a.spectra);
    const GridField pg = render_field(a.state, RenderField::P, cfg.n_lat, cfg.n_lon, sphere.basis());
    const GridField wsg = render_field(a.state, RenderField::Ws, cfg.n_lat, cfg.n_lon, sphere.basis());
    emit_scatter_csv(cfg.output / ("scatter_" + tag + ".csv"), scatter_data(pg, wsg));
    render_pgm(cfg.output / ("P_" + tag + ".pgm"), pg);
    render_pgm(cfg.output / ("Ws_" + tag + ".pgm"), wsg);
    render_pgm(cfg.output / ("W_" + tag + ".pgm"),
               render_field(a.state, RenderField::W, cfg.n_lat, cfg.n_lon, sphere.basis()));
    render_pgm(cfg.output / ("Wr_" + tag + ".pgm"),
               render_field(a.state, RenderField::Wr, cfg.n_lat, cfg.n_lon, sphere.basis()));
  };
  auto observer = [&](std::size_t step, double t, const Matrix& w) {
    try {
      sample(step, t, w);
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(step) + " (" + stage + "): " + e.what());
    }
  };

  RunOptions opts;
  opts.stride = cfg.snapshot_stride;
  opts.record = false;
  opts.first_step = first;
  opts.t0 = t0;
  run(w0, cfg.step_params(), cfg.steps, sphere.laplacian(), observer, opts);
  return summary;
}

}  // namespace zeitlin
