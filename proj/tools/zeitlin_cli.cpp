// zeitlin command line tool.  Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zeitlin/zeitlin.h"

namespace fs = std::filesystem;

namespace {

// Carries a status out of nested helpers to main.
struct Failure : std::runtime_error {
  Failure(zt_status s, const std::string& where) : std::runtime_error(where + ": " + zt_last_error()), status(s) {}
  zt_status status;
};

void check(zt_status s, const std::string& where) {
  if (s != ZT_OK) throw Failure(s, where);
}

struct SphereDeleter {
  void operator()(zt_sphere* s) const { zt_sphere_destroy(s); }
};
struct ConfigDeleter {
  void operator()(zt_config* c) const { zt_config_destroy(c); }
};
using SpherePtr = std::unique_ptr<zt_sphere, SphereDeleter>;
using ConfigPtr = std::unique_ptr<zt_config, ConfigDeleter>;

SpherePtr make_sphere(int n) {
  zt_sphere* s = nullptr;
  check(zt_sphere_create(n, &s), "sphere");
  return SpherePtr(s);
}

struct LoadedSnapshot {
  int n = 0;
  std::uint64_t step = 0;
  double t = 0.0;
  std::vector<double> w;
};

LoadedSnapshot load_snapshot(const std::string& path) {
  LoadedSnapshot s;
  check(zt_snapshot_info(path.c_str(), &s.n, nullptr, nullptr), "read " + path);
  s.w.resize(2 * static_cast<std::size_t>(s.n) * s.n);
  check(zt_snapshot_read(path.c_str(), s.n, &s.step, &s.t, s.w.data()), "read " + path);
  return s;
}

ConfigPtr load_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                      const std::optional<std::string>& output) {
  zt_config* c = nullptr;
  if (path.empty())
    check(zt_config_default(&c), "config");
  else
    check(zt_config_load(path.c_str(), &c), "config " + path);
  ConfigPtr cfg(c);
  if (seed) check(zt_config_set_seed(cfg.get(), *seed), "config");
  if (output) check(zt_config_set_output(cfg.get(), output->c_str()), "config");
  return cfg;
}

std::string config_json(const zt_config* cfg) {
  std::size_t needed = 0;
  check(zt_config_to_json(cfg, nullptr, 0, &needed), "config");
  std::string buf(needed, '\0');
  check(zt_config_to_json(cfg, buf.data(), buf.size(), &needed), "config");
  buf.resize(needed - 1);
  return buf;
}

double frob(const std::vector<double>& a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc);
}

double frob_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(acc);
}

void print_diagnostics(const zt_split_record& d) {
  std::printf("H      %.17g\nEns    %.17g\nHs     %.17g\nHr     %.17g\nEs     %.17g\nEr     %.17g\nalpha  %.17g\n", d.H,
              d.Ens, d.Hs, d.Hr, d.Es, d.Er, d.alpha);
}

// Structural checks, splitting identities and the splitting-rate consistency.
int verify(const LoadedSnapshot& snap) {
  const int n = snap.n;
  auto sphere = make_sphere(n);
  int failures = 0;
  auto report = [&](const char* what, bool ok, double value) {
    std::printf("%-36s %s (%.3e)\n", what, ok ? "ok" : "FAILED", value);
    if (!ok) ++failures;
  };

  const double norm = frob(snap.w);
  double skew = 0.0;
  double tr_re = 0.0, tr_im = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const std::size_t a = 2 * (static_cast<std::size_t>(r) * n + c);
      const std::size_t b = 2 * (static_cast<std::size_t>(c) * n + r);
      skew += std::pow(snap.w[a] + snap.w[b], 2) + std::pow(snap.w[a + 1] - snap.w[b + 1], 2);
    }
    tr_re += snap.w[2 * (static_cast<std::size_t>(r) * n + r)];
    tr_im += snap.w[2 * (static_cast<std::size_t>(r) * n + r) + 1];
  }
  const double scale = norm > 0.0 ? norm : 1.0;
  report("skew-Hermitian", std::sqrt(skew) <= 1e-12 * scale, std::sqrt(skew) / scale);
  report("trace-free", std::hypot(tr_re, tr_im) <= 1e-12 * scale, std::hypot(tr_re, tr_im) / scale);

  zt_split_record d{};
  check(zt_split_diagnostics(sphere.get(), snap.w.data(), &d), "split_diagnostics");
  print_diagnostics(d);
  int bad = 0;
  check(zt_check_split_identities(sphere.get(), snap.w.data(), &bad), "split identities");
  report("splitting identities", bad == 0, static_cast<double>(bad));
  if (bad != 0) std::printf("  first violation: %s\n", zt_last_error());

  std::vector<double> dws(snap.w.size()), dwr(snap.w.size()), dw(snap.w.size());
  const zt_status rs = zt_splitting_rhs(sphere.get(), snap.w.data(), dws.data(), dwr.data(), nullptr);
  if (rs == ZT_NUMERIC_ERROR) {
    std::printf("%-36s skipped (%s)\n", "dWs + dWr = [P, W]", zt_last_error());
  } else {
    check(rs, "splitting_rhs");
    check(zt_rhs(sphere.get(), snap.w.data(), dw.data()), "rhs");
    for (std::size_t k = 0; k < dws.size(); ++k) dws[k] += dwr[k];
    const double dn = frob(dw);
    const double rel = frob_diff(dws, dw) / (dn > 0.0 ? dn : 1.0);
    report("dWs + dWr = [P, W]", rel <= 1e-12, rel);
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Zeitlin simulation and canonical splitting on the quantized sphere"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  int threads = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--output", output, "output directory or file");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  };

  std::string snapshot, resume, field = "W";
  int n_lat = 0, n_lon = 0;

  auto* gen = app.add_subcommand("gen-ic", "write the initial vorticity snapshot");
  add_common(gen);
  auto* runc = app.add_subcommand("run", "run an experiment");
  add_common(runc);
  runc->add_option("--resume", resume, "continue from a snapshot file");

  auto* splitc = app.add_subcommand("split", "split a snapshot into Ws and Wr");
  auto* spec = app.add_subcommand("spectrum", "energy spectra of W, Ws and Wr as CSV");
  auto* scat = app.add_subcommand("scatter", "grid values of P against Ws as CSV");
  auto* rend = app.add_subcommand("render", "render a field of a snapshot as PGM");
  auto* ver = app.add_subcommand("verify", "check invariants and splitting identities of a snapshot");
  for (auto* sub : {splitc, spec, scat, rend, ver}) {
    add_common(sub);
    sub->add_option("snapshot", snapshot, "snapshot file")->required();
  }
  for (auto* sub : {scat, rend}) {
    sub->add_option("--n-lat", n_lat, "grid latitudes (default from config)");
    sub->add_option("--n-lon", n_lon, "grid longitudes (default from config)");
  }
  rend->add_option("--field", field, "W, P, Ws or Wr")->check(CLI::IsMember({"W", "P", "Ws", "Wr"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  // The numerical kernels are sequential; --threads is accepted for interface stability.
  (void)threads;

  try {
    if (gen->parsed()) {
      auto cfg = load_config(config_path, seed, std::nullopt);
      const int n = zt_config_n(cfg.get());
      auto sphere = make_sphere(n);
      std::vector<double> w(2 * static_cast<std::size_t>(n) * n);
      check(zt_gen_initial(cfg.get(), sphere.get(), w.data()), "gen-ic");
      fs::path out = output.value_or("initial.zeit");
      if (fs::is_directory(out)) out /= "snapshot_0.zeit";
      check(zt_snapshot_write(out.string().c_str(), n, 0, 0.0, w.data()), "write " + out.string());
      std::printf("%s\n", out.string().c_str());
      return 0;
    }

    if (runc->parsed()) {
      auto cfg = load_config(config_path, seed, output);
      std::fprintf(stderr, "%s\n", config_json(cfg.get()).c_str());
      zt_run_summary summary{};
      check(zt_run_experiment(cfg.get(), resume.empty() ? nullptr : resume.c_str(), &summary), "run");
      std::printf("rows %zu snapshots %zu identity_failures %zu\n", summary.rows, summary.snapshots,
                  summary.identity_failures);
      if (summary.identity_failures > 0) {
        std::fprintf(stderr, "first identity failure: %s\n", zt_last_error());
        return 3;
      }
      return 0;
    }

    const LoadedSnapshot snap = load_snapshot(snapshot);
    auto sphere = make_sphere(snap.n);

    if (splitc->parsed()) {
      const fs::path dir = output.value_or(".");
      fs::create_directories(dir);
      std::vector<double> ws(snap.w.size()), wr(snap.w.size()), p(snap.w.size());
      check(zt_split(sphere.get(), snap.w.data(), ws.data(), wr.data(), p.data()), "split");
      for (const auto& [name, data] : {std::pair{"Ws.zeit", &ws}, {"Wr.zeit", &wr}}) {
        const std::string path = (dir / name).string();
        check(zt_snapshot_write(path.c_str(), snap.n, snap.step, snap.t, data->data()), "write " + path);
      }
      zt_split_record d{};
      check(zt_split_diagnostics(sphere.get(), snap.w.data(), &d), "split_diagnostics");
      print_diagnostics(d);
      return 0;
    }

    if (spec->parsed()) {
      const std::string path = output.value_or("spectrum.csv");
      check(zt_write_spectrum_csv(sphere.get(), snap.w.data(), path.c_str()), "spectrum " + path);
      return 0;
    }

    // Grid size: explicit flags, else the config (or its defaults).
    auto cfg = load_config(config_path, std::nullopt, std::nullopt);
    int lat = 0, lon = 0;
    zt_config_grid(cfg.get(), &lat, &lon);
    if (n_lat > 0) lat = n_lat;
    if (n_lon > 0) lon = n_lon;

    if (scat->parsed()) {
      const std::string path = output.value_or("scatter.csv");
      check(zt_write_scatter_csv(sphere.get(), snap.w.data(), lat, lon, path.c_str()), "scatter " + path);
      return 0;
    }

    if (rend->parsed()) {
      const zt_field f = field == "P" ? ZT_FIELD_P : field == "Ws" ? ZT_FIELD_WS : field == "Wr" ? ZT_FIELD_WR : ZT_FIELD_W;
      const std::string path = output.value_or(field + ".pgm");
      check(zt_render_pgm(sphere.get(), snap.w.data(), f, lat, lon, path.c_str()), "render " + path);
      return 0;
    }

    if (ver->parsed()) return verify(snap) == 0 ? 0 : 3;
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return zt_exit_code(e.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
