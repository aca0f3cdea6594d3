/* fairdeliver: fair p2p content-delivery simulator.
 *
 * C interface to the scenario engine. All functions are thread-safe as
 * long as each fdl_options / fdl_result handle is confined to one thread;
 * independent scenarios may run concurrently. Strings returned from a
 * result handle stay valid until fdl_result_free.
 */
#ifndef FAIRDELIVER_H
#define FAIRDELIVER_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fdl_status {
    FDL_OK = 0,
    FDL_ERR_ARG = 1,      /* null pointer or malformed argument */
    FDL_ERR_IO = 2,       /* scenario file unreadable */
    FDL_ERR_SCHEMA = 3,   /* scenario violates the schema */
    FDL_ERR_INTERNAL = 4, /* unexpected engine failure */
} fdl_status;

typedef struct fdl_options fdl_options; /* scenario overrides */
typedef struct fdl_result fdl_result;   /* finished scenario execution */

fdl_options* fdl_options_new(void);
void fdl_options_free(fdl_options* opt);
fdl_status fdl_options_set_seed(fdl_options* opt, uint64_t seed);
/* mode: "download" or "stream" */
fdl_status fdl_options_set_mode(fdl_options* opt, const char* mode);
fdl_status fdl_options_set_chunk_count(fdl_options* opt, uint64_t n);
fdl_status fdl_options_set_chunk_size(fdl_options* opt, uint64_t eta);

/* Runs every repetition of the scenario; overrides (may be NULL) beat
 * file values. On success *out owns the reports. */
fdl_status fdl_run_scenario_file(const char* path, const fdl_options* opt, fdl_result** out);
fdl_status fdl_run_scenario_json(const char* json_text, const fdl_options* opt, fdl_result** out);

/* 1 when every verdict of every repetition passed. */
int fdl_result_passed(const fdl_result* res);
/* Report document (JSON). */
const char* fdl_result_report_json(const fdl_result* res);
/* Round-by-round transcripts (JSON lines, all repetitions). */
const char* fdl_result_transcript_jsonl(const fdl_result* res);
void fdl_result_free(fdl_result* res);

/* Human-readable detail for the most recent failure on this thread. */
const char* fdl_last_error(void);

/* Build identifiers (JSON): primitive suite and schema versions. */
const char* fdl_build_info(void);
const char* fdl_status_name(fdl_status status);

#ifdef __cplusplus
}
#endif

#endif /* FAIRDELIVER_H */
