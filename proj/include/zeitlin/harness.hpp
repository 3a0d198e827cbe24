#pragma once

// Experiment configuration, initial conditions, snapshot files and the
// CSV / PGM writers behind the command line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "zeitlin/diagnostics.hpp"
#include "zeitlin/dynamics.hpp"
#include "zeitlin/grid.hpp"

namespace zeitlin {

struct DegreeRange {
  int lo = 0;
  int hi = 0;
};

struct RunConfig {
  int N = 32;
  std::uint64_t seed = 1;
  int l_min = 2;
  int l_max = 10;
  double h = 0.2;
  std::size_t steps = 200;
  std::size_t snapshot_stride = 10;
  double fp_tol = 1e-12;
  int max_iters = 100;
  int k_max = 4;
  int n_lat = 64;
  int n_lon = 128;
  DegreeRange slope_s{3, 20};
  DegreeRange slope_r{10, 50};
  std::filesystem::path output = "out";

  void validate() const;
  StepParams step_params() const { return {h, fp_tol, max_iters}; }
};

/// Parses a JSON document; unknown keys and out-of-range values raise ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

/// mt19937_64 with Box-Muller normal variates: u1, u2 from the top 53 bits,
/// z0 = sqrt(-2 ln(1 - u1)) cos(2 pi u2), then z1 with sin, consumed in order.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform();

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Random smooth vorticity: coefficients for l_min <= l <= l_max drawn in
/// order l ascending, then c_l0 (real), then Re c_lm, Im c_lm for m = 1..l.
Matrix gen_initial(const RunConfig& cfg, const QuantizedSphere& sphere);

struct Snapshot {
  std::uint64_t step = 0;
  double t_sim = 0.0;
  Matrix W;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 28;

/// Header: "ZEIT", u32 version, u32 N, u64 step, f64 t_sim; then N*N
/// (re, im) f64 pairs, row-major, everything little-endian.
void write_snapshot(const std::filesystem::path& path, std::uint64_t step, double t_sim, const Matrix& w);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Column names of the series CSV, k_max >= 2.
std::vector<std::string> series_columns(int k_max);
std::string series_header(int k_max);

struct SeriesRow {
  std::uint64_t step = 0;
  double t_sim = 0.0;
  double t_sec = 0.0;
  InvariantRecord inv;
  SplitDiagnostics split;
  double slope_s = 0.0;  // NaN when the fit has too few points
  double slope_r = 0.0;
};

std::string format_series_row(const SeriesRow& row);

struct SpectraTriple {
  Spectrum H, Hs, Hr;
};

void emit_spectrum_csv(const std::filesystem::path& path, const SpectraTriple& spectra);
void emit_scatter_csv(const std::filesystem::path& path, const std::vector<ScatterPoint>& points);
/// 8-bit binary PGM, linear over [-max|f|, max|f|], zero maps to 128.
void render_pgm(const std::filesystem::path& path, const GridField& field);

/// Everything computed for one sampled state.
struct SampleAnalysis {
  SplitState state;
  SeriesRow row;
  SpectraTriple spectra;
};

SampleAnalysis analyze_sample(const Matrix& w, std::uint64_t step, double t_sim, const RunConfig& cfg,
                              const QuantizedSphere& sphere);

enum class RenderField { W, P, Ws, Wr };
GridField render_field(const SplitState& state, RenderField which, int n_lat, int n_lon, const QuantizedBasis& basis);

struct ExperimentSummary {
  std::size_t rows = 0;
  std::size_t snapshots = 0;
  std::vector<std::string> identity_failures;
};

/// Runs gen_initial (or continues from `resume`) and writes series.csv,
/// snapshot_<step>.zeit at the sample steps {0, mid, end}, plus spectrum,
/// scatter and PGM renders at the same steps.
ExperimentSummary run_experiment(const RunConfig& cfg, const std::optional<Snapshot>& resume = std::nullopt);

}  // namespace zeitlin
