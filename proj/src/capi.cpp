#include "kho/kho.h"

#include <cstring>
#include <new>
#include <string>

#include "kho/decoherence.hpp"
#include "kho/error.hpp"
#include "kho/grid.hpp"
#include "kho/harness.hpp"
#include "kho/io.hpp"
#include "kho/liouville.hpp"
#include "kho/maps.hpp"
#include "kho/metrics.hpp"
#include "kho/wigner.hpp"

struct kho_grid {
  kho::PhaseSpaceGrid grid;
};

struct kho_field {
  kho::Field field;
};

namespace {

thread_local std::string last_error;

kho_status status_of(kho::ErrorCode c) {
  switch (c) {
    case kho::ErrorCode::invalid_argument: return KHO_ERR_INVALID_ARGUMENT;
    case kho::ErrorCode::config: return KHO_ERR_CONFIG;
    case kho::ErrorCode::io: return KHO_ERR_IO;
    case kho::ErrorCode::numerical: return KHO_ERR_NUMERICAL;
    case kho::ErrorCode::grid_mismatch: return KHO_ERR_GRID_MISMATCH;
  }
  return KHO_ERR_INTERNAL;
}

template <typename Fn>
kho_status guarded(Fn&& fn) {
  try {
    fn();
    return KHO_OK;
  } catch (const kho::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return KHO_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return KHO_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  kho::require(p != nullptr, kho::ErrorCode::invalid_argument,
               std::string(what) + " must not be null");
}

kho::FieldKind to_kind(kho_field_kind k) {
  kho::require(k == KHO_QUANTUM || k == KHO_CLASSICAL, kho::ErrorCode::invalid_argument,
               "unknown field kind");
  return k == KHO_QUANTUM ? kho::FieldKind::quantum : kho::FieldKind::classical;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* kho_version(void) { return "1.0.0"; }

const char* kho_last_error(void) { return last_error.c_str(); }

const char* kho_status_string(kho_status s) {
  switch (s) {
    case KHO_OK: return "ok";
    case KHO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case KHO_ERR_CONFIG: return "configuration error";
    case KHO_ERR_IO: return "I/O error";
    case KHO_ERR_NUMERICAL: return "numerical failure";
    case KHO_ERR_GRID_MISMATCH: return "grid mismatch";
    case KHO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

kho_status kho_grid_create(double extent, size_t n_cells, double eta, kho_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new kho_grid{kho::make_grid(extent, n_cells, eta)};
  });
}

kho_status kho_grid_create_square(double extent, size_t n_cells, kho_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new kho_grid{kho::make_square_grid(extent, n_cells)};
  });
}

void kho_grid_destroy(kho_grid* g) { delete g; }

kho_status kho_grid_shape(const kho_grid* g, size_t* nq, size_t* np, double* dq,
                          double* dp) {
  return guarded([&] {
    need(g, "grid");
    if (nq) *nq = g->grid.nq();
    if (np) *np = g->grid.np();
    if (dq) *dq = g->grid.dq();
    if (dp) *dp = g->grid.dp();
  });
}

kho_status kho_field_coherent(const kho_grid* g, double q0, double p0, double eta,
                              kho_field_kind kind, kho_field** out) {
  return guarded([&] {
    need(g, "grid");
    need(out, "out");
    *out = new kho_field{kho::coherent_state(g->grid, {q0, p0}, eta, to_kind(kind))};
  });
}

kho_status kho_field_clone(const kho_field* f, kho_field** out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    *out = new kho_field{f->field};
  });
}

void kho_field_destroy(kho_field* f) { delete f; }

kho_status kho_field_values(const kho_field* f, const double** values, size_t* count) {
  return guarded([&] {
    need(f, "field");
    need(values, "values");
    need(count, "count");
    *values = f->field.values().data();
    *count = f->field.values().size();
  });
}

kho_status kho_field_kick_index(const kho_field* f, size_t* n) {
  return guarded([&] {
    need(f, "field");
    need(n, "n");
    *n = f->field.kick_index();
  });
}

kho_status kho_field_integrate(const kho_field* f, double* out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    *out = kho::integrate(f->field);
  });
}

kho_status kho_field_read(const char* path, kho_field_kind kind, kho_field** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new kho_field{kho::read_snapshot(path, to_kind(kind))};
  });
}

kho_status kho_field_write(const kho_field* f, const char* path) {
  return guarded([&] {
    need(f, "field");
    need(path, "path");
    kho::write_snapshot(f->field, path);
  });
}

kho_status kho_quantum_step(kho_field* f, double K, double nu_tau, double eta, double D) {
  return guarded([&] {
    need(f, "field");
    kho::ModelParams mp{K, nu_tau, eta};
    mp.validate();
    f->field = kho::quantum_step(f->field, mp, D);
  });
}

kho_status kho_classical_step(kho_field* f, double K, double nu_tau, double D,
                              int spectral) {
  return guarded([&] {
    need(f, "field");
    kho::ModelParams mp;
    mp.K = K;
    mp.nu_tau = nu_tau;
    mp.validate();
    f->field = kho::classical_step(f->field, mp, D,
                                   spectral ? kho::ClassicalScheme::spectral
                                            : kho::ClassicalScheme::semi_lagrangian);
  });
}

kho_status kho_dn(const kho_field* quantum, const kho_field* classical, double* out) {
  return guarded([&] {
    need(quantum, "quantum");
    need(classical, "classical");
    need(out, "out");
    *out = kho::dn(quantum->field, classical->field);
  });
}

kho_status kho_chi(double K, double eta, double D, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = kho::chi(K, eta, D);
  });
}

kho_status kho_critical_kick(double nu_tau, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = kho::critical_kick(nu_tau);
  });
}

kho_status kho_classify_origin(double K, double nu_tau, kho_stability* kind,
                               double* trace) {
  return guarded([&] {
    const auto s = kho::classify_origin(K, nu_tau);
    if (kind) {
      *kind = s.kind == kho::Stability::elliptic    ? KHO_ELLIPTIC
              : s.kind == kho::Stability::parabolic ? KHO_PARABOLIC
                                                    : KHO_HYPERBOLIC;
    }
    if (trace) *trace = s.trace;
  });
}

kho_status kho_strobe_step(double K, double nu_tau, double* q, double* p) {
  return guarded([&] {
    need(q, "q");
    need(p, "p");
    kho::ModelParams mp;
    mp.K = K;
    mp.nu_tau = nu_tau;
    mp.validate();
    const auto x = kho::strobe_step({*q, *p}, mp);
    *q = x.q;
    *p = x.p;
  });
}

kho_status kho_validate_config(const char* config_json) {
  return guarded([&] {
    need(config_json, "config");
    (void)kho::parse_config(config_json);
  });
}

kho_status kho_run_json(const char* config_json, size_t workers, char** record_json) {
  return guarded([&] {
    need(config_json, "config");
    const auto config = kho::parse_config(config_json);
    const auto record = kho::run(config, workers);
    if (record_json) *record_json = copy_string(record.to_json());
  });
}

void kho_string_free(char* s) { delete[] s; }

kho_status kho_emit_density_plot(const char* snapshot_path, const char* out_path,
                                 double gamma, int signed_channels,
                                 double* negativity_fraction) {
  return guarded([&] {
    need(snapshot_path, "snapshot path");
    need(out_path, "out path");
    const auto info =
        kho::emit_density_plot(snapshot_path, out_path, gamma, signed_channels != 0);
    if (negativity_fraction) *negativity_fraction = info.negativity_fraction;
  });
}

}  // extern "C"
