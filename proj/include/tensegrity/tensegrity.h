#ifndef TENSEGRITY_H
#define TENSEGRITY_H

/*
 * C interface to the tensegrity shape-from-inclination library.
 *
 * All handles are opaque; every function that can fail returns a tsg_status
 * and records a human-readable message retrievable with tsg_last_error()
 * (thread-local, valid until the next failing call on the same thread).
 * Strings returned through char** out-parameters are heap-allocated and
 * must be released with tsg_string_free().
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tsg_status {
  TSG_OK = 0,
  TSG_ERR_INVALID_ARGUMENT = 1,
  TSG_ERR_SPEC_INVALID = 2,
  TSG_ERR_PARSE = 3,
  TSG_ERR_IO = 4,
  TSG_ERR_SINGULAR = 5,
  TSG_ERR_DEGENERATE = 6,
  TSG_ERR_ORACLE = 7,
  TSG_ERR_UNIDENTIFIABLE = 8,
  TSG_ERR_INTERNAL = 99
} tsg_status;

typedef struct tsg_spec tsg_spec_t;
typedef struct tsg_estimate tsg_estimate_t;
typedef struct tsg_tracker tsg_tracker_t;

/* Solver configuration; mirrors the double-loop descent parameters. */
typedef struct tsg_config {
  int steps;              /* outer iterations, default 300 */
  double lr_theta;        /* default 0.0001 */
  double lr_p;            /* default 0.0005 */
  int inner_theta;        /* default 1 */
  int inner_p;            /* default 1 */
  int optimizer;          /* 0 = gd, 1 = sgdm, 2 = adam */
  double momentum;        /* sgdm, default 0.9 */
  double adam_beta1;      /* default 0.9 */
  double adam_beta2;      /* default 0.999 */
  double adam_epsilon;    /* default 1e-8 */
  double grad_tol_p;      /* default 1e-3 */
  double grad_tol_theta;  /* default 1e-3 */
  int restarts;           /* default 5 */
  unsigned long long seed;
  int warm_steps;         /* tracking budget per frame, default 50 */
} tsg_config_t;

void tsg_config_default(tsg_config_t* config);

const char* tsg_version(void);
const char* tsg_last_error(void);
void tsg_string_free(char* s);

/* ---- structure specs ---------------------------------------------------- */

/* Accepts a file path, "builtin:prism", or "builtin:taut-prism". */
tsg_status tsg_spec_load(const char* path, tsg_spec_t** out);
tsg_status tsg_spec_parse(const char* json_text, tsg_spec_t** out);
tsg_status tsg_spec_save(const tsg_spec_t* spec, const char* path);

/* Newline-joined violation list; empty string when the spec is valid. */
tsg_status tsg_spec_validate(const tsg_spec_t* spec, char** violations_out);

int tsg_spec_strut_count(const tsg_spec_t* spec);
int tsg_spec_node_count(const tsg_spec_t* spec);
int tsg_spec_cable_count(const tsg_spec_t* spec);
const char* tsg_spec_name(const tsg_spec_t* spec);
void tsg_spec_free(tsg_spec_t* spec);

/* ---- frames ------------------------------------------------------------- */

tsg_status tsg_frame_render(double timestamp, const double* phis, int arity,
                            char** line_out);
tsg_status tsg_frame_parse(const char* line, int arity, double* timestamp_out,
                           double* phis_out);

/* ---- single estimate ---------------------------------------------------- */

/* Multi-start solve of one inclination vector (arity = strut count). */
tsg_status tsg_estimate_run(const tsg_spec_t* spec, const double* phis, int arity,
                            const tsg_config_t* config, tsg_estimate_t** out);

int tsg_estimate_node_count(const tsg_estimate_t* est);
/* Copies 3 * node_count doubles. */
void tsg_estimate_nodes(const tsg_estimate_t* est, double* out);
/* Copies strut_count entries each; any pointer may be NULL to skip. */
void tsg_estimate_state(const tsg_estimate_t* est, double* centers_out,
                        double* thetas_out, double* phis_out);
double tsg_estimate_energy(const tsg_estimate_t* est);
int tsg_estimate_iterations(const tsg_estimate_t* est);
int tsg_estimate_converged(const tsg_estimate_t* est);
double tsg_estimate_grad_norm_p(const tsg_estimate_t* est);
double tsg_estimate_grad_norm_theta(const tsg_estimate_t* est);
double tsg_estimate_wall_time(const tsg_estimate_t* est);
double tsg_estimate_timestamp(const tsg_estimate_t* est);
int tsg_estimate_degenerate(const tsg_estimate_t* est);
const char* tsg_estimate_degenerate_reason(const tsg_estimate_t* est);
/* One output record: timestamp, converged flag, energy, node triples. */
tsg_status tsg_estimate_record(const tsg_estimate_t* est, char** line_out);
void tsg_estimate_free(tsg_estimate_t* est);

/* ---- streaming tracker -------------------------------------------------- */

tsg_status tsg_tracker_new(const tsg_spec_t* spec, const tsg_config_t* config,
                           tsg_tracker_t** out);
/* *out is NULL when the line was rejected (malformed or out of order). */
tsg_status tsg_tracker_submit_line(tsg_tracker_t* tracker, const char* line,
                                   tsg_estimate_t** out);
unsigned long long tsg_tracker_rejects(const tsg_tracker_t* tracker);
unsigned long long tsg_tracker_skips(const tsg_tracker_t* tracker);
void tsg_tracker_free(tsg_tracker_t* tracker);

/* ---- whole-run operations backing the CLI ------------------------------- */

/* Writes a frame stream (and optionally a ground-truth sidecar) for one of
 * the scenarios: stationary | lateral | angular | tilted | recovery. */
tsg_status tsg_simulate_files(const tsg_spec_t* spec, const char* scenario,
                              double duration, double rate, double sigma,
                              unsigned long long seed, const char* out_path,
                              const char* truth_path);

/* Streams a frame file through a tracker, writing one estimate record per
 * accepted frame. truth_path (nullable) enables the metrics block in the
 * summary; summary_out (nullable) receives a key-value report. */
tsg_status tsg_track_file(const tsg_spec_t* spec, const tsg_config_t* config,
                          const char* in_path, const char* truth_path,
                          const char* out_path, char** summary_out);

/* Same, but ingesting newline-delimited frames from one TCP client. The
 * call returns when the client disconnects. port 0 picks a free port;
 * bound_port_out (nullable) reports the actual one. */
tsg_status tsg_track_listen(const tsg_spec_t* spec, const tsg_config_t* config,
                            const char* host, int port, const char* truth_path,
                            const char* out_path, int* bound_port_out,
                            char** summary_out);

/* Optimizer comparison on synthetic equilibria; optimizer is gd | sgdm |
 * adam | all. Writes a per-optimizer table to report_out. */
tsg_status tsg_bench_run(const tsg_spec_t* spec, int trials, const char* optimizer,
                         double sigma, unsigned long long seed, int steps,
                         char** report_out);

/* Fits cable stiffnesses to a reference capture (stream + truth sidecar).
 * tied != 0 searches one shared stiffness. Writes the fitted spec to
 * out_spec_path and a key-value summary to summary_out (nullable). */
tsg_status tsg_calibrate_files(const tsg_spec_t* spec, const char* in_path,
                               const char* truth_path, int budget,
                               unsigned long long seed, int tied, double lo,
                               double hi, const char* out_spec_path,
                               char** summary_out);

/* ---- metrics ------------------------------------------------------------ */

/* Mean node distance between two stacked-xyz clouds, optionally after
 * aligning over translation plus rotation about gravity. */
tsg_status tsg_node_mae(const double* est_nodes, const double* ref_nodes,
                        int node_count, int aligned, double* out);

#ifdef __cplusplus
}
#endif

#endif /* TENSEGRITY_H */
