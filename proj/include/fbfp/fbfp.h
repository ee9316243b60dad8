/* C interface to the fbfp solver library. All functions are thread-safe with
 * respect to distinct handles; the last error message is per thread. */
#ifndef FBFP_FBFP_H
#define FBFP_FBFP_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(FBFP_BUILDING)
#    define FBFP_API __declspec(dllexport)
#  else
#    define FBFP_API __declspec(dllimport)
#  endif
#else
#  define FBFP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fbfp_status {
    FBFP_OK = 0,
    FBFP_FAILED = 1,          /* suite: at least one check failed */
    FBFP_ERR_CONFIG = 2,      /* malformed or invalid configuration */
    FBFP_ERR_DIVERGED = 3,    /* non-finite iterate; partial trace kept */
    FBFP_ERR_INFEASIBLE = 4,  /* schedule violates the feasibility inequality */
    FBFP_ERR_IO = 5,
    FBFP_ERR_INTERNAL = 6,
    FBFP_ERR_ARGUMENT = 7     /* null or out-of-range argument */
} fbfp_status;

typedef struct fbfp_config fbfp_config;
typedef struct fbfp_result fbfp_result;

FBFP_API const char* fbfp_version(void);

/* Message for the most recent failing call on this thread ("" if none).
 * Successful calls do not reset it. */
FBFP_API const char* fbfp_last_error(void);

FBFP_API fbfp_status fbfp_config_load_file(const char* path, fbfp_config** out);
FBFP_API fbfp_status fbfp_config_load_string(const char* json_text, fbfp_config** out);
FBFP_API void fbfp_config_free(fbfp_config* cfg);

/* Overrides the horizon of the penalty certificate (0 disables it). */
FBFP_API fbfp_status fbfp_config_set_certificate_horizon(fbfp_config* cfg, long horizon);
/* Overrides the output paths; NULL leaves a path unchanged, "" disables it. */
FBFP_API fbfp_status fbfp_config_set_outputs(fbfp_config* cfg, const char* trace_path, const char* summary_path);

/* Schema and schedule feasibility only. *report_json (optional) receives a
 * string to release with fbfp_string_free. */
FBFP_API fbfp_status fbfp_validate(const fbfp_config* cfg, char** report_json);

/* Runs the configured solver and writes the configured outputs. On
 * FBFP_ERR_DIVERGED the result still holds the partial trace. *out is set
 * whenever the returned status is OK, DIVERGED or INFEASIBLE. */
FBFP_API fbfp_status fbfp_run(const fbfp_config* cfg, fbfp_result** out);

FBFP_API fbfp_status fbfp_result_status(const fbfp_result* res);
FBFP_API long fbfp_result_iterations(const fbfp_result* res);
FBFP_API fbfp_status fbfp_result_summary_json(const fbfp_result* res, char** out);
FBFP_API fbfp_status fbfp_result_write_trace(const fbfp_result* res, const char* path);
FBFP_API void fbfp_result_free(fbfp_result* res);

typedef void (*fbfp_line_callback)(const char* line, void* user);

/* Runs the built-in battery restricted by a tag expression ("a,b" = either,
 * "a+b" = both; NULL or "" = all). One PASS/FAIL line per case goes to
 * on_line if given. Returns FBFP_OK or FBFP_FAILED. */
FBFP_API fbfp_status fbfp_suite(const char* filter, fbfp_line_callback on_line, void* user,
                                char** report_json, int* failures);

FBFP_API void fbfp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
