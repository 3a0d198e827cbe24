#ifndef ZEITLIN_H
#define ZEITLIN_H

/* C interface to the zeitlin library.
 *
 * Matrices are N*N complex, row-major, passed as 2*N*N doubles with real and
 * imaginary parts interleaved.  Spherical coefficients are stored at index
 * l*l + l + m (0 <= l <= N-1, |m| <= l), likewise as interleaved pairs, so a
 * coefficient array holds 2*N*N doubles.
 *
 * Every function returns a zt_status.  On failure zt_last_error() returns the
 * message of the most recent error on the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(ZEITLIN_BUILDING)
#define ZT_API __attribute__((visibility("default")))
#else
#define ZT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum zt_status {
  ZT_OK = 0,
  ZT_INVALID_ARGUMENT = 1,
  ZT_CONFIG_ERROR = 2,
  ZT_NUMERIC_ERROR = 3,
  ZT_IO_ERROR = 4,
  ZT_INTERNAL_ERROR = 5
} zt_status;

typedef enum zt_field { ZT_FIELD_W = 0, ZT_FIELD_P = 1, ZT_FIELD_WS = 2, ZT_FIELD_WR = 3 } zt_field;

typedef struct zt_sphere zt_sphere;
typedef struct zt_config zt_config;

typedef struct zt_split_record {
  double H, Ens, Hs, Hr, Es, Er, alpha;
} zt_split_record;

typedef struct zt_run_summary {
  size_t rows;
  size_t snapshots;
  size_t identity_failures;
} zt_run_summary;

ZT_API const char* zt_last_error(void);
ZT_API const char* zt_version(void);
/* Conventional process exit code for a status: 0, 2 (argument/config), 3, 4. */
ZT_API int zt_exit_code(zt_status status);

/* ---- quantized sphere ---------------------------------------------------- */

ZT_API zt_status zt_sphere_create(int n, zt_sphere** out);
ZT_API void zt_sphere_destroy(zt_sphere* sphere);
ZT_API int zt_sphere_size(const zt_sphere* sphere);

ZT_API zt_status zt_laplacian_apply(const zt_sphere* s, const double* w, double* out);
ZT_API zt_status zt_laplacian_solve(const zt_sphere* s, const double* w, double* p);
ZT_API zt_status zt_coeffs_to_matrix(const zt_sphere* s, const double* coeffs, int max_degree, double* w);
ZT_API zt_status zt_matrix_to_coeffs(const zt_sphere* s, const double* w, double* coeffs);
ZT_API zt_status zt_time_convert(double t_sim, int n, double* t_sec);

/* ---- dynamics ------------------------------------------------------------ */

ZT_API zt_status zt_rhs(const zt_sphere* s, const double* w, double* dw);
/* iterations and residual may be NULL. */
ZT_API zt_status zt_step(const zt_sphere* s, const double* w, double h, double fp_tol, int max_iters, double* w_next,
                         int* iterations, double* residual);
ZT_API zt_status zt_run(const zt_sphere* s, const double* w0, double h, double fp_tol, int max_iters, size_t steps,
                        double* w_end);

/* ---- splitting and diagnostics --------------------------------------------- */

/* p may be NULL. */
ZT_API zt_status zt_split(const zt_sphere* s, const double* w, double* ws, double* wr, double* p);
/* b may be NULL. */
ZT_API zt_status zt_splitting_rhs(const zt_sphere* s, const double* w, double* dws, double* dwr, double* b);
ZT_API zt_status zt_split_diagnostics(const zt_sphere* s, const double* w, zt_split_record* out);
/* Number of violated splitting identities, written to *failures. */
ZT_API zt_status zt_check_split_identities(const zt_sphere* s, const double* w, int* failures);
/* casimirs holds k_max - 1 values (k = 2..k_max); momentum holds 3. */
ZT_API zt_status zt_invariants(const zt_sphere* s, const double* w, int k_max, double* energy, double* enstrophy,
                               double* casimirs, double* momentum);
/* h_of_l holds N-1 values for l = 1..N-1. */
ZT_API zt_status zt_energy_spectrum(const zt_sphere* s, const double* w, double* h_of_l);
ZT_API zt_status zt_fit_slope(const double* h_of_l, int count, int l_lo, int l_hi, double* slope);
/* Vortex blobs of the stabilizer part Ws on an n_lat x n_lon grid. */
ZT_API zt_status zt_count_blobs(const zt_sphere* s, const double* w, int n_lat, int n_lon, int* blobs);

/* ---- harness --------------------------------------------------------------- */

ZT_API zt_status zt_config_load(const char* path, zt_config** out);
ZT_API zt_status zt_config_parse(const char* json_text, zt_config** out);
ZT_API zt_status zt_config_default(zt_config** out);
ZT_API void zt_config_destroy(zt_config* cfg);
ZT_API zt_status zt_config_set_seed(zt_config* cfg, uint64_t seed);
ZT_API zt_status zt_config_set_output(zt_config* cfg, const char* dir);
ZT_API int zt_config_n(const zt_config* cfg);
ZT_API zt_status zt_config_grid(const zt_config* cfg, int* n_lat, int* n_lon);
/* Copies the JSON form into buf (NUL-terminated) when capacity suffices;
 * *needed receives the required size including the terminator. */
ZT_API zt_status zt_config_to_json(const zt_config* cfg, char* buf, size_t capacity, size_t* needed);

ZT_API zt_status zt_gen_initial(const zt_config* cfg, const zt_sphere* s, double* w);
/* resume_snapshot may be NULL; summary may be NULL. */
ZT_API zt_status zt_run_experiment(const zt_config* cfg, const char* resume_snapshot, zt_run_summary* summary);

ZT_API zt_status zt_snapshot_write(const char* path, int n, uint64_t step, double t_sim, const double* w);
/* Header only; any output pointer may be NULL. */
ZT_API zt_status zt_snapshot_info(const char* path, int* n, uint64_t* step, double* t_sim);
/* w must hold 2*n*n doubles where n is the snapshot size. */
ZT_API zt_status zt_snapshot_read(const char* path, int n, uint64_t* step, double* t_sim, double* w);

ZT_API zt_status zt_write_spectrum_csv(const zt_sphere* s, const double* w, const char* path);
ZT_API zt_status zt_write_scatter_csv(const zt_sphere* s, const double* w, int n_lat, int n_lon, const char* path);
ZT_API zt_status zt_render_pgm(const zt_sphere* s, const double* w, zt_field field, int n_lat, int n_lon,
                               const char* path);

#ifdef __cplusplus
}
#endif

#endif
