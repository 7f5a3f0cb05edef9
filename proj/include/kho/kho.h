#ifndef KHO_KHO_H
#define KHO_KHO_H

/* C interface to the kicked harmonic oscillator library. Every call returns a
 * kho_status; on failure kho_last_error() describes the problem (the string is
 * per thread and valid until the next failing call on that thread). */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kho_status {
  KHO_OK = 0,
  KHO_ERR_INVALID_ARGUMENT = 1,
  KHO_ERR_CONFIG = 2,
  KHO_ERR_IO = 3,
  KHO_ERR_NUMERICAL = 4,
  KHO_ERR_GRID_MISMATCH = 5,
  KHO_ERR_INTERNAL = 6
} kho_status;

typedef enum kho_field_kind { KHO_QUANTUM = 0, KHO_CLASSICAL = 1 } kho_field_kind;

typedef enum kho_stability {
  KHO_ELLIPTIC = 0,
  KHO_PARABOLIC = 1,
  KHO_HYPERBOLIC = 2
} kho_stability;

typedef struct kho_grid kho_grid;
typedef struct kho_field kho_field;

const char* kho_version(void);
const char* kho_last_error(void);
const char* kho_status_string(kho_status s);

/* grids */
kho_status kho_grid_create(double extent, size_t n_cells, double eta, kho_grid** out);
kho_status kho_grid_create_square(double extent, size_t n_cells, kho_grid** out);
void kho_grid_destroy(kho_grid* g);
kho_status kho_grid_shape(const kho_grid* g, size_t* nq, size_t* np, double* dq,
                          double* dp);

/* fields */
kho_status kho_field_coherent(const kho_grid* g, double q0, double p0, double eta,
                              kho_field_kind kind, kho_field** out);
kho_status kho_field_clone(const kho_field* f, kho_field** out);
void kho_field_destroy(kho_field* f);
kho_status kho_field_values(const kho_field* f, const double** values, size_t* count);
kho_status kho_field_kick_index(const kho_field* f, size_t* n);
kho_status kho_field_integrate(const kho_field* f, double* out);
kho_status kho_field_read(const char* path, kho_field_kind kind, kho_field** out);
kho_status kho_field_write(const kho_field* f, const char* path);

/* one kick period in place: kick, rotation by nu_tau, diffusion D */
kho_status kho_quantum_step(kho_field* f, double K, double nu_tau, double eta, double D);
kho_status kho_classical_step(kho_field* f, double K, double nu_tau, double D,
                              int spectral);
kho_status kho_dn(const kho_field* quantum, const kho_field* classical, double* out);

/* scalar helpers */
kho_status kho_chi(double K, double eta, double D, double* out);
kho_status kho_critical_kick(double nu_tau, double* out);
kho_status kho_classify_origin(double K, double nu_tau, kho_stability* kind,
                               double* trace);
kho_status kho_strobe_step(double K, double nu_tau, double* q, double* p);

/* experiments: config and record are JSON documents. *record_json is
 * allocated by the library; release it with kho_string_free. workers > 0
 * overrides KHO_WORKERS and the config. */
kho_status kho_run_json(const char* config_json, size_t workers, char** record_json);
kho_status kho_validate_config(const char* config_json);
void kho_string_free(char* s);

/* 16-bit PGM of a snapshot plus <out>.json; signed_channels adds _pos/_neg. */
kho_status kho_emit_density_plot(const char* snapshot_path, const char* out_path,
                                 double gamma, int signed_channels,
                                 double* negativity_fraction);

#ifdef __cplusplus
}
#endif

#endif /* KHO_KHO_H */
