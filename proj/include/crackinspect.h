#ifndef CRACKINSPECT_H
#define CRACKINSPECT_H

#include <stddef.h>

#if defined(CRACKINSPECT_BUILDING)
#define CI_API __attribute__((visibility("default")))
#else
#define CI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ci_status {
  CI_OK = 0,
  CI_INVALID_ARGUMENT = 1,
  CI_INVALID_POLYGON = 2,
  CI_DIMENSION_MISMATCH = 3,
  CI_NO_DOMINANT_AXIS = 4,
  CI_WIDTH_VIOLATION = 5,
  CI_PARSE = 6,
  CI_IO = 7,
  CI_BACKEND = 8,
  CI_NOT_FOUND = 9,
  CI_INVALID_STATE = 10,
  CI_PORT_BUSY = 11,
  CI_INTERNAL = 12,
} ci_status;

typedef enum ci_detector {
  CI_DETECTOR_ANNOTATIONS = 0,
  CI_DETECTOR_COMMAND = 1,
  CI_DETECTOR_BASELINE = 2,
} ci_detector;

typedef enum ci_verdict {
  CI_VERDICT_ACCEPT = 1,
  CI_VERDICT_REJECT = 2,
} ci_verdict;

typedef struct ci_config ci_config;
typedef struct ci_session ci_session;

/* Message of the last failed call on this thread; "" after success. */
CI_API const char* ci_last_error(void);
CI_API const char* ci_status_name(ci_status status);
CI_API const char* ci_version(void);

/* Analysis configuration. */
CI_API ci_status ci_config_new(ci_config** out);
CI_API void ci_config_free(ci_config* config);
CI_API ci_status ci_config_set_input_dir(ci_config* config, const char* dir);
CI_API ci_status ci_config_set_session_file(ci_config* config, const char* path);
CI_API ci_status ci_config_set_detector(ci_config* config, ci_detector kind);
CI_API ci_status ci_config_set_annotations_dir(ci_config* config, const char* dir);
CI_API ci_status ci_config_set_command(ci_config* config, const char* command, double timeout_s);
CI_API ci_status ci_config_set_baseline(ci_config* config, int window, double offset);
CI_API ci_status ci_config_set_thresholds(ci_config* config, double lower, double upper);
CI_API ci_status ci_config_set_orientation_tolerance(ci_config* config, double degrees);
CI_API ci_status ci_config_set_workers(ci_config* config, unsigned workers);
CI_API ci_status ci_config_set_scale_cm_per_px(ci_config* config, double cm_per_px);
CI_API ci_status ci_config_set_scale_reference(ci_config* config, double ax, double ay, double bx,
                                               double by, double known_length_cm);
CI_API ci_status ci_config_set_scale_camera(ci_config* config, double distance_cm,
                                            double focal_px);

/* Sessions. ci_analyze blocks until every image is processed;
 * ci_analyze_start returns at once and ci_session_wait joins the workers. */
CI_API ci_status ci_analyze(const ci_config* config, ci_session** out);
CI_API ci_status ci_analyze_start(const ci_config* config, ci_session** out);
CI_API ci_status ci_session_wait(ci_session* session);
CI_API ci_status ci_session_open(const char* path, ci_session** out);
CI_API void ci_session_close(ci_session* session);

CI_API ci_status ci_session_image_count(ci_session* session, size_t* out);
CI_API ci_status ci_session_instance_count(ci_session* session, size_t* out);
/* Scan warnings from ci_analyze/ci_analyze_start, one per line. The pointer
 * stays valid until the session is closed. */
CI_API const char* ci_session_warnings(ci_session* session);

CI_API ci_status ci_record_decision(ci_session* session, const char* instance_id,
                                    ci_verdict verdict);
CI_API ci_status ci_retriage(ci_session* session, double lower, double upper);

/* Confident/, Possible/, session.json and report.csv under out_dir. */
CI_API ci_status ci_write_outputs(ci_session* session, const char* out_dir, size_t* rows);
CI_API ci_status ci_write_report(ci_session* session, const char* csv_path, size_t* rows);

/* Serves the review API until ci_session_stop. port 0 picks a free port;
 * on_bound (optional) receives the bound port before serving starts.
 * out_dir and ui_dir may be NULL. */
typedef void (*ci_bound_fn)(int port, void* user);
CI_API ci_status ci_serve(ci_session* session, const char* host, int port, const char* out_dir,
                          const char* ui_dir, ci_bound_fn on_bound, void* user);
CI_API ci_status ci_session_stop(ci_session* session);

/* Evaluation: predictions is an annotation directory or a session file. */
CI_API ci_status ci_evaluate(const char* predictions, const char* gt_dir, const char* out_csv,
                             size_t* images);

typedef struct ci_box_stats {
  double lower_adjacent;
  double lower_quartile;
  double median;
  double upper_quartile;
  double upper_adjacent;
  size_t outlier_count;
} ci_box_stats;

/* outliers may be NULL; otherwise it must hold n values. */
CI_API ci_status ci_box_stats_compute(const double* values, size_t n, ci_box_stats* out,
                                      double* outliers);
CI_API ci_status ci_length_error_pct(double estimate_cm, double ground_truth_cm, double* out);

#ifdef __cplusplus
}
#endif

#endif
