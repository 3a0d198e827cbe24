#include "zeitlin/zeitlin.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "zeitlin/harness.hpp"

using namespace zeitlin;

struct zt_sphere {
  explicit zt_sphere(int n) : sphere(TruncationLevel(n)) {}
  QuantizedSphere sphere;
};

struct zt_config {
  RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

zt_status fail(zt_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <typename F>
zt_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return ZT_OK;
  } catch (const Error& e) {
    return fail(static_cast<zt_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ZT_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(ZT_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(ZT_INTERNAL_ERROR, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw NotInRange(std::string("null pointer: ") + name);
}

const QuantizedSphere& sphere_of(const zt_sphere* s) {
  require(s, "sphere");
  return s->sphere;
}

Matrix load(const double* data, int n) {
  require(data, "matrix");
  Matrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const std::size_t k = 2 * (static_cast<std::size_t>(r) * n + c);
      m(r, c) = Complex(data[k], data[k + 1]);
    }
  return m;
}

void store(const Matrix& m, double* out) {
  require(out, "output matrix");
  const auto n = m.rows();
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t k = 2 * (static_cast<std::size_t>(r) * n + c);
      out[k] = m(r, c).real();
      out[k + 1] = m(r, c).imag();
    }
}

const RunConfig& config_of(const zt_config* c) {
  require(c, "config");
  return c->cfg;
}

GridField field_grid(const QuantizedSphere& sp, const Matrix& w, RenderField which, int n_lat, int n_lon) {
  return render_field(split(w, sp.laplacian()), which, n_lat, n_lon, sp.basis());
}

}  // namespace

extern "C" {

const char* zt_last_error(void) { return g_last_error.c_str(); }
const char* zt_version(void) { return "0.1.0"; }

int zt_exit_code(zt_status status) {
  switch (status) {
    case ZT_OK: return 0;
    case ZT_INVALID_ARGUMENT:
    case ZT_CONFIG_ERROR: return 2;
    case ZT_NUMERIC_ERROR: return 3;
    case ZT_IO_ERROR: return 4;
    default: return 1;
  }
}

zt_status zt_sphere_create(int n, zt_sphere** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new zt_sphere(n);
  });
}

void zt_sphere_destroy(zt_sphere* sphere) { delete sphere; }

int zt_sphere_size(const zt_sphere* sphere) { return sphere ? sphere->sphere.size() : 0; }

zt_status zt_laplacian_apply(const zt_sphere* s, const double* w, double* out) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    store(sp.laplacian().apply(load(w, sp.size())), out);
  });
}

zt_status zt_laplacian_solve(const zt_sphere* s, const double* w, double* p) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    store(sp.laplacian().solve(load(w, sp.size())), p);
  });
}

zt_status zt_coeffs_to_matrix(const zt_sphere* s, const double* coeffs, int max_degree, double* w) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(coeffs, "coeffs");
    if (max_degree < 0) throw NotInRange("max_degree must be >= 0");
    SphericalCoefficients c(max_degree);
    for (std::size_t k = 0; k < c.data().size(); ++k) {
      const int l = static_cast<int>(std::sqrt(static_cast<double>(k)));
      const int m = static_cast<int>(k) - l * l - l;
      c(l, m) = Complex(coeffs[2 * k], coeffs[2 * k + 1]);
    }
    store(coeffs_to_matrix(c, sp.basis()), w);
  });
}

zt_status zt_matrix_to_coeffs(const zt_sphere* s, const double* w, double* coeffs) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(coeffs, "coeffs");
    const SphericalCoefficients c = matrix_to_coeffs(load(w, sp.size()), sp.basis());
    for (std::size_t k = 0; k < c.data().size(); ++k) {
      coeffs[2 * k] = c.data()[k].real();
      coeffs[2 * k + 1] = c.data()[k].imag();
    }
  });
}

zt_status zt_time_convert(double t_sim, int n, double* t_sec) {
  return guarded([&] {
    require(t_sec, "t_sec");
    *t_sec = time_convert(t_sim, TruncationLevel(n));
  });
}

zt_status zt_rhs(const zt_sphere* s, const double* w, double* dw) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    store(euler_zeitlin_rhs(load(w, sp.size()), sp.laplacian()), dw);
  });
}

zt_status zt_step(const zt_sphere* s, const double* w, double h, double fp_tol, int max_iters, double* w_next,
                  int* iterations, double* residual) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    const StepResult r = isospectral_midpoint_step(load(w, sp.size()), {h, fp_tol, max_iters}, sp.laplacian());
    store(r.W, w_next);
    if (iterations) *iterations = r.iterations;
    if (residual) *residual = r.residual;
  });
}

zt_status zt_run(const zt_sphere* s, const double* w0, double h, double fp_tol, int max_iters, size_t steps,
                 double* w_end) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    RunOptions opts;
    opts.stride = steps > 0 ? steps : 1;
    opts.record = true;
    const Trajectory traj = run(load(w0, sp.size()), {h, fp_tol, max_iters}, steps, sp.laplacian(), {}, opts);
    store(traj.back().W, w_end);
  });
}

zt_status zt_split(const zt_sphere* s, const double* w, double* ws, double* wr, double* p) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    const SplitState st = split(load(w, sp.size()), sp.laplacian());
    store(st.Ws, ws);
    store(st.Wr, wr);
    if (p) store(st.P, p);
  });
}

zt_status zt_splitting_rhs(const zt_sphere* s, const double* w, double* dws, double* dwr, double* b) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    const SplitState st = split(load(w, sp.size()), sp.laplacian());
    const SplitRates r = splitting_rhs(st, sp.laplacian());
    store(r.dWs, dws);
    store(r.dWr, dwr);
    if (b) store(r.B, b);
  });
}

zt_status zt_split_diagnostics(const zt_sphere* s, const double* w, zt_split_record* out) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(out, "out");
    const SplitDiagnostics d = split_diagnostics(split(load(w, sp.size()), sp.laplacian()), sp.laplacian());
    *out = {d.H, d.Ens, d.Hs, d.Hr, d.Es, d.Er, d.alpha};
  });
}

zt_status zt_check_split_identities(const zt_sphere* s, const double* w, int* failures) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(failures, "failures");
    const SplitDiagnostics d = split_diagnostics(split(load(w, sp.size()), sp.laplacian()), sp.laplacian());
    const auto bad = check_split_identities(d, sp.size());
    *failures = static_cast<int>(bad.size());
    if (!bad.empty()) g_last_error = bad.front();
  });
}

zt_status zt_invariants(const zt_sphere* s, const double* w, int k_max, double* energy, double* enstrophy,
                        double* casimirs, double* momentum) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    const InvariantRecord r = invariants(load(w, sp.size()), k_max, sp);
    if (energy) *energy = r.H;
    if (enstrophy) *enstrophy = r.Ens;
    if (casimirs) std::copy(r.C.begin(), r.C.end(), casimirs);
    if (momentum) std::copy(r.L.begin(), r.L.end(), momentum);
  });
}

zt_status zt_energy_spectrum(const zt_sphere* s, const double* w, double* h_of_l) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(h_of_l, "h_of_l");
    const Spectrum spec = energy_spectrum(load(w, sp.size()), sp.basis());
    for (std::size_t i = 0; i < spec.H_of_l.size(); ++i) h_of_l[i] = spec.H_of_l[i].second;
  });
}

zt_status zt_fit_slope(const double* h_of_l, int count, int l_lo, int l_hi, double* slope) {
  return guarded([&] {
    require(h_of_l, "h_of_l");
    require(slope, "slope");
    Spectrum spec;
    for (int i = 0; i < count; ++i) spec.H_of_l.emplace_back(i + 1, h_of_l[i]);
    *slope = fit_slope(spec, l_lo, l_hi).slope;
  });
}

zt_status zt_count_blobs(const zt_sphere* s, const double* w, int n_lat, int n_lon, int* blobs) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(blobs, "blobs");
    *blobs = count_blobs(field_grid(sp, load(w, sp.size()), RenderField::Ws, n_lat, n_lon));
  });
}

zt_status zt_config_load(const char* path, zt_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto c = std::make_unique<zt_config>();
    c->cfg = load_config(path);
    *out = c.release();
  });
}

zt_status zt_config_parse(const char* json_text, zt_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = nullptr;
    auto c = std::make_unique<zt_config>();
    c->cfg = parse_config(json_text);
    *out = c.release();
  });
}

zt_status zt_config_default(zt_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new zt_config();
  });
}

void zt_config_destroy(zt_config* cfg) { delete cfg; }

zt_status zt_config_set_seed(zt_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.seed = seed;
  });
}

zt_status zt_config_set_output(zt_config* cfg, const char* dir) {
  return guarded([&] {
    require(cfg, "config");
    require(dir, "dir");
    cfg->cfg.output = dir;
  });
}

int zt_config_n(const zt_config* cfg) { return cfg ? cfg->cfg.N : 0; }

zt_status zt_config_grid(const zt_config* cfg, int* n_lat, int* n_lon) {
  return guarded([&] {
    const RunConfig& c = config_of(cfg);
    if (n_lat) *n_lat = c.n_lat;
    if (n_lon) *n_lon = c.n_lon;
  });
}

zt_status zt_config_to_json(const zt_config* cfg, char* buf, size_t capacity, size_t* needed) {
  return guarded([&] {
    const std::string text = config_to_json(config_of(cfg));
    if (needed) *needed = text.size() + 1;
    if (buf && capacity > text.size()) std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

zt_status zt_gen_initial(const zt_config* cfg, const zt_sphere* s, double* w) {
  return guarded([&] { store(gen_initial(config_of(cfg), sphere_of(s)), w); });
}

zt_status zt_run_experiment(const zt_config* cfg, const char* resume_snapshot, zt_run_summary* summary) {
  return guarded([&] {
    std::optional<Snapshot> resume;
    if (resume_snapshot) resume = read_snapshot(resume_snapshot);
    const ExperimentSummary r = run_experiment(config_of(cfg), resume);
    if (summary) *summary = {r.rows, r.snapshots, r.identity_failures.size()};
    if (!r.identity_failures.empty()) g_last_error = r.identity_failures.front();
  });
}

zt_status zt_snapshot_write(const char* path, int n, uint64_t step, double t_sim, const double* w) {
  return guarded([&] {
    require(path, "path");
    if (n < 2) throw InvalidTruncation("snapshot N must be >= 2");
    write_snapshot(path, step, t_sim, load(w, n));
  });
}

zt_status zt_snapshot_info(const char* path, int* n, uint64_t* step, double* t_sim) {
  return guarded([&] {
    require(path, "path");
    const Snapshot snap = read_snapshot(path);
    if (n) *n = static_cast<int>(snap.W.rows());
    if (step) *step = snap.step;
    if (t_sim) *t_sim = snap.t_sim;
  });
}

zt_status zt_snapshot_read(const char* path, int n, uint64_t* step, double* t_sim, double* w) {
  return guarded([&] {
    require(path, "path");
    const Snapshot snap = read_snapshot(path);
    if (snap.W.rows() != n)
      throw DimensionError("snapshot has N=" + std::to_string(snap.W.rows()) + ", caller expects " + std::to_string(n));
    store(snap.W, w);
    if (step) *step = snap.step;
    if (t_sim) *t_sim = snap.t_sim;
  });
}

zt_status zt_write_spectrum_csv(const zt_sphere* s, const double* w, const char* path) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(path, "path");
    const SplitState st = split(load(w, sp.size()), sp.laplacian());
    emit_spectrum_csv(path, {energy_spectrum(st.W, sp.basis()), energy_spectrum(st.Ws, sp.basis()),
                             energy_spectrum(st.Wr, sp.basis())});
  });
}

zt_status zt_write_scatter_csv(const zt_sphere* s, const double* w, int n_lat, int n_lon, const char* path) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(path, "path");
    const SplitState st = split(load(w, sp.size()), sp.laplacian());
    emit_scatter_csv(path, scatter_data(render_field(st, RenderField::P, n_lat, n_lon, sp.basis()),
                                        render_field(st, RenderField::Ws, n_lat, n_lon, sp.basis())));
  });
}

zt_status zt_render_pgm(const zt_sphere* s, const double* w, zt_field field, int n_lat, int n_lon, const char* path) {
  return guarded([&] {
    const auto& sp = sphere_of(s);
    require(path, "path");
    RenderField which;
    switch (field) {
      case ZT_FIELD_W: which = RenderField::W; break;
      case ZT_FIELD_P: which = RenderField::P; break;
      case ZT_FIELD_WS: which = RenderField::Ws; break;
      case ZT_FIELD_WR: which = RenderField::Wr; break;
      default: throw NotInRange("unknown field selector");
    }
    render_pgm(path, field_grid(sp, load(w, sp.size()), which, n_lat, n_lon));
  });
}

}  // extern "C"
