/* C interface to the np-lab scenario runner.
 *
 * All functions returning np_status set a thread-local error message
 * retrievable with np_error_message() on failure.  Reports are opaque
 * handles owned by the caller and released with np_report_free().
 */
#ifndef NPLAB_H
#define NPLAB_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum np_status {
    NP_OK = 0,
    NP_ERR_INVALID_ARGUMENT = 1,
    NP_ERR_RUNTIME = 2,
    NP_ERR_IO = 3
} np_status;

typedef struct np_report np_report;

const char* np_version(void);

/* Last error message of the current thread ("" if none). */
const char* np_error_message(void);

/* Bundled scenario corpus.  The returned list is a NULL-terminated array of
 * strings; release it with np_string_list_free. */
np_status np_list_scenarios(char*** names_out);
void np_string_list_free(char** names);

/* JSON text of a bundled scenario; release with np_string_free. */
np_status np_bundled_scenario_text(const char* name, char** text_out);
void np_string_free(char* s);

/* Run a scenario from a JSON config file or from the bundled corpus.
 * output_dir overrides the artifact directory (NULL or "" keeps the
 * scenario/environment default). */
np_status np_run_scenario_file(const char* path, const char* output_dir, np_report** out);
np_status np_run_bundled(const char* name, const char* output_dir, np_report** out);
void np_report_free(np_report* r);

/* Report accessors. */
const char* np_report_name(const np_report* r);
const char* np_report_config_hash(const np_report* r);
const char* np_report_json(const np_report* r); /* full report document */
const char* np_report_output_dir(const np_report* r); /* "" if none written */
double np_report_wall_seconds(const np_report* r);
int np_report_all_passed(const np_report* r);
int np_report_verdict_count(const np_report* r);
const char* np_report_verdict_name(const np_report* r, int i);
const char* np_report_verdict_detail(const np_report* r, int i);
int np_report_verdict_pass(const np_report* r, int i);
double np_report_verdict_value(const np_report* r, int i);
double np_report_verdict_threshold(const np_report* r, int i);

/* Convergence study over the scenario's mesh ladder; the table is returned
 * as CSV text (level,value,diff,rate).  Release with np_string_free. */
np_status np_convergence_file(const char* path, const char* observable, char** csv_out);
np_status np_convergence_bundled(const char* name, const char* observable, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* NPLAB_H */
