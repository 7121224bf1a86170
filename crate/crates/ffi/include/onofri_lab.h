#ifndef ONOFRI_LAB_H
#define ONOFRI_LAB_H

#pragma once

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

// Result of every fallible call.
typedef enum OnofriStatus {
  ONOFRI_STATUS_OK = 0,
  ONOFRI_STATUS_NULL_POINTER = 1,
  ONOFRI_STATUS_INVALID_ARGUMENT = 2,
  // Outside the domain of a closed form, or the wrong geometry kind.
  ONOFRI_STATUS_DOMAIN = 3,
  // A solver, flow or fixed point failed to converge.
  ONOFRI_STATUS_NUMERICAL = 4,
  // The caller's buffer is shorter than the data.
  ONOFRI_STATUS_BUFFER_TOO_SMALL = 5,
  ONOFRI_STATUS_IO = 6,
  ONOFRI_STATUS_PANIC = 7,
} OnofriStatus;

// Nodal values of a field on a geometry.
typedef struct OnofriField OnofriField;

// Recorded flow diagnostics.
typedef struct OnofriFlowTrace OnofriFlowTrace;

// Discretized circle, zonal sphere or radial plane.
typedef struct OnofriGeometry OnofriGeometry;

// Radial probability density on a plane geometry.
typedef struct OnofriWeight OnofriWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *onofri_last_error(void);

// Library version as a static NUL-terminated string.
const char *onofri_version(void);

// Circle of period `period` with `n` Fourier nodes.
//
// # Safety
// `out` must be a valid pointer.
enum OnofriStatus onofri_geometry_circle(size_t n, double period, struct OnofriGeometry **out_geom);

// Zonal sphere of radius `radius` with `n` Gauss-Legendre nodes.
//
// # Safety
// `out_geom` must be a valid pointer.
enum OnofriStatus onofri_geometry_sphere(size_t n, double radius, struct OnofriGeometry **out_geom);

// Zonal sphere of total area 1.
//
// # Safety
// `out_geom` must be a valid pointer.
enum OnofriStatus onofri_geometry_sphere_unit_volume(size_t n, struct OnofriGeometry **out_geom);

// Radial plane truncated at `radius`.
//
// # Safety
// `out_geom` must be a valid pointer.
enum OnofriStatus onofri_geometry_plane(size_t n, double radius, struct OnofriGeometry **out_geom);

// # Safety
// `geom` must come from an `onofri_geometry_*` constructor (or be null).
void onofri_geometry_free(struct OnofriGeometry *geom);

// Node count, or 0 for a null handle.
//
// # Safety
// `geom` must be a live handle or null.
size_t onofri_geometry_resolution(const struct OnofriGeometry *geom);

// Copies the node coordinates (x, θ or r) into `buf`.
//
// # Safety
// `buf` must hold `len` doubles; `written` may be null.
enum OnofriStatus onofri_geometry_nodes(const struct OnofriGeometry *geom,
                                        double *buf,
                                        size_t len,
                                        size_t *written);

// Smallest positive eigenvalue of -Δ (circle and sphere).
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_first_eigenvalue(const struct OnofriGeometry *geom, double *out_value);

// Field from `len` nodal values (`len` must equal the node count).
//
// # Safety
// `values` must point to `len` doubles.
enum OnofriStatus onofri_field_from_values(const struct OnofriGeometry *geom,
                                           const double *values,
                                           size_t len,
                                           struct OnofriField **out_field);

// # Safety
// `field` must come from this library (or be null).
void onofri_field_free(struct OnofriField *field);

// Copies the nodal values into `buf`.
//
// # Safety
// `buf` must hold `len` doubles; `written` may be null.
enum OnofriStatus onofri_field_values(const struct OnofriField *field,
                                      double *buf,
                                      size_t len,
                                      size_t *written);

// θ₀(d) = 16(d-1)²/((6-d)(d+2)), for 1 ≤ d < 6.
//
// # Safety
// `out_value` must be valid.
enum OnofriStatus onofri_theta0(double d, double *out_value);

// Coefficients a, b, c of the quadratic form, for d > 1.
//
// # Safety
// Out-pointers must be valid.
enum OnofriStatus onofri_abc(double d, double theta, double *a, double *b, double *c);

// b² - 4ac and the sign (-1, 0, 1) of its factored form.
//
// # Safety
// Out-pointers must be valid.
enum OnofriStatus onofri_discriminant(double d, double theta, double *delta, int8_t *sign);

// f₂ - f₁ for 1 < d ≤ 2 and 0 ≤ x ≤ 1.
//
// # Safety
// `out_value` must be valid.
enum OnofriStatus onofri_fontenas_gap(double d, double x, double *out_value);

// Rigidity quotient of a nonconstant zonal field.
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_lambda_star_quotient(const struct OnofriField *field, double *out_value);

// Multistart estimate of λ⋆ on a zonal sphere (`starts` descents over `modes` modes).
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_minimize_lambda_star(const struct OnofriGeometry *geom,
                                              size_t starts,
                                              size_t modes,
                                              uint64_t seed,
                                              double *out_value);

// `F_λ` on a circle or sphere.
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_functional_f(const struct OnofriField *field,
                                      double lambda,
                                      double *out_value);

// `G_λ` on a sphere.
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_dissipation_g(const struct OnofriField *field,
                                       double lambda,
                                       double *out_value);

// Solves -½Δu + λ = e^u from `init` (circle or sphere). `is_constant` is
// set when the solution lies within 1e-6 of its mean.
//
// # Safety
// Pointers must be valid; `residual` and `is_constant` may be null.
enum OnofriStatus onofri_solve_el(const struct OnofriField *init,
                                  double lambda,
                                  double tol,
                                  struct OnofriField **out_solution,
                                  double *residual,
                                  bool *is_constant);

// Runs the flow to `t_final` (explicit RK4, `safety` times the stability limit).
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_flow_evolve(const struct OnofriField *init,
                                     double lambda,
                                     double t_final,
                                     double safety,
                                     struct OnofriFlowTrace **out_trace);

// # Safety
// `trace` must come from [`onofri_flow_evolve`] (or be null).
void onofri_flow_trace_free(struct OnofriFlowTrace *trace);

// Number of recorded samples, or 0 for a null handle.
//
// # Safety
// `trace` must be live or null.
size_t onofri_flow_trace_len(const struct OnofriFlowTrace *trace);

// Sample `index`: time, F, G and ∫e^f.
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_flow_trace_sample(const struct OnofriFlowTrace *trace,
                                           size_t index,
                                           double *t,
                                           double *f,
                                           double *g,
                                           double *mass);

// `|F(0) - ∫G dt - F(T)|` and the largest relative mass drift.
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_flow_trace_diagnostics(const struct OnofriFlowTrace *trace,
                                                double *energy_defect,
                                                double *mass_drift);

// Weight from a spec such as `stereographic`, `gaussian:1`, `keller-segel:4`.
//
// # Safety
// `spec` must be a NUL-terminated string; pointers must be valid.
enum OnofriStatus onofri_weight_new(const struct OnofriGeometry *geom,
                                    const char *spec,
                                    struct OnofriWeight **out_weight);

// # Safety
// `weight` must come from [`onofri_weight_new`] (or be null).
void onofri_weight_free(struct OnofriWeight *weight);

// Λ⋆ = inf(-Δ log μ)/(8πμ).
//
// # Safety
// Pointers must be valid.
enum OnofriStatus onofri_weight_lambda_star(const struct OnofriWeight *weight, double *out_value);

// Runs an identity suite (`circle`, `sphere`, `plane`, `all`). A
// nonpositive `tol` selects the per-suite default.
//
// # Safety
// `suite` must be NUL-terminated; out-pointers must be valid.
enum OnofriStatus onofri_identity_suite(const char *suite,
                                        size_t trials,
                                        uint64_t seed,
                                        double tol,
                                        size_t *passed,
                                        size_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONOFRI_LAB_H */
