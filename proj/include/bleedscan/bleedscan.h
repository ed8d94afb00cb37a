/*
 * bleedscan C API.
 *
 * Every object is an opaque handle created by a bs_*_create / decode / load
 * call and released with the matching bs_*_free. Fallible calls return a
 * bs_status; on failure bs_last_error() holds a message for the calling
 * thread until its next failing call. Strings returned through `char**` are
 * heap-allocated and must be released with bs_string_free.
 */
#ifndef BLEEDSCAN_H
#define BLEEDSCAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BLEEDSCAN_BUILDING)
#    define BS_API __declspec(dllexport)
#  else
#    define BS_API __declspec(dllimport)
#  endif
#else
#  define BS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bs_status {
  BS_OK = 0,
  BS_ERR_INVALID_ARGUMENT = 1,
  BS_ERR_IO = 2,
  BS_ERR_UNSUPPORTED_FORMAT = 3,
  BS_ERR_BIT_DEPTH = 4,
  BS_ERR_CORRUPT = 5,
  BS_ERR_PARSE = 6,
  BS_ERR_EVALUATION = 7,
  BS_ERR_INTERNAL = 8
} bs_status;

typedef enum bs_verdict { BS_NON_BLEEDING = 0, BS_BLEEDING = 1 } bs_verdict;

/* Output encodings for per-frame records and evaluation reports. */
typedef enum bs_format { BS_FORMAT_CSV = 0, BS_FORMAT_STRUCTURED = 1 } bs_format;

typedef struct bs_rule bs_rule;
typedef struct bs_frame bs_frame;
typedef struct bs_batch bs_batch;
typedef struct bs_manifest bs_manifest;
typedef struct bs_report bs_report;

typedef struct bs_frame_verdict {
  uint64_t matching_count;
  uint64_t min_count;
  bs_verdict verdict;
} bs_frame_verdict;

/* Borrowed view of one batch slot; pointers live as long as the batch. */
typedef struct bs_batch_entry {
  const char* source;
  int ok; /* 1: verdict is valid; 0: error holds the per-file message */
  bs_frame_verdict verdict;
  const char* error;
} bs_batch_entry;

typedef struct bs_gen_spec {
  uint64_t seed;
  size_t width;
  size_t height;
  double blob_fraction;
} bs_gen_spec;

typedef struct bs_report_counts {
  uint64_t min_count;
  uint64_t n;
  uint64_t tp;
  uint64_t fp;
  uint64_t tn;
  uint64_t fn;
  uint64_t predicted_bleeding;
  uint64_t predicted_non_bleeding;
  uint64_t correct;
  uint64_t decode_failures;
  double accuracy;
} bs_report_counts;

/* Called in input order with one formatted record (no trailing newline). */
typedef void (*bs_record_callback)(void* ctx, size_t index, const char* record);

BS_API const char* bs_version(void);
BS_API const char* bs_last_error(void);
BS_API const char* bs_status_string(bs_status status);
BS_API void bs_string_free(char* s);

/* --- rules --------------------------------------------------------------- */

/* `source` is "purity_red", "range_ratio" or a path to a rule document. */
BS_API bs_status bs_rule_resolve(const char* source, bs_rule** out);
BS_API bs_status bs_rule_parse(const char* document, bs_rule** out);
BS_API bs_status bs_rule_create(const char* id, int r_lo, int r_hi, int g_lo, int g_hi, int b_lo,
                                int b_hi, bs_rule** out);
BS_API bs_status bs_rule_serialize(const bs_rule* rule, char** out);
BS_API bs_status bs_rule_volume(const bs_rule* rule, uint64_t* out);
/* lo[3] / hi[3] in R, G, B order, inclusive. */
BS_API bs_status bs_rule_bounds(const bs_rule* rule, uint8_t lo[3], uint8_t hi[3]);
BS_API bs_status bs_rule_pixel_matches(const bs_rule* rule, uint8_t r, uint8_t g, uint8_t b,
                                       int* out);
BS_API const char* bs_rule_id(const bs_rule* rule);
/* BS_ERR_INVALID_ARGUMENT when two rules share an id. */
BS_API bs_status bs_rules_check_unique(const bs_rule* const* rules, size_t count);
BS_API void bs_rule_free(bs_rule* rule);

/* --- frames -------------------------------------------------------------- */

BS_API bs_status bs_frame_decode(const char* path, bs_frame** out);
/* `rgb` holds width * height interleaved R, G, B bytes, row-major. */
BS_API bs_status bs_frame_from_rgb(size_t width, size_t height, const uint8_t* rgb,
                                   const char* source, bs_frame** out);
BS_API size_t bs_frame_width(const bs_frame* frame);
BS_API size_t bs_frame_height(const bs_frame* frame);
BS_API const uint8_t* bs_frame_data(const bs_frame* frame);
BS_API bs_status bs_frame_write_ppm(const bs_frame* frame, const char* path);
BS_API bs_status bs_frame_count_matching(const bs_frame* frame, const bs_rule* rule,
                                         uint64_t* out);
BS_API bs_status bs_frame_classify(const bs_frame* frame, const bs_rule* rule,
                                   uint64_t min_count, bs_frame_verdict* out);
BS_API void bs_frame_free(bs_frame* frame);

/* --- batch classification ------------------------------------------------ */

BS_API bs_status bs_classify_batch(const char* const* paths, size_t count, const bs_rule* rule,
                                   uint64_t min_count, unsigned workers, bs_batch** out);
/* Streams formatted records through `callback` in input order while the
 * batch runs. Per-file failures become error records, not a failing status. */
BS_API bs_status bs_classify_batch_stream(const char* const* paths, size_t count,
                                          const bs_rule* rule, uint64_t min_count,
                                          unsigned workers, bs_format format,
                                          bs_record_callback callback, void* ctx);
BS_API size_t bs_batch_size(const bs_batch* batch);
BS_API bs_status bs_batch_get(const bs_batch* batch, size_t index, bs_batch_entry* out);
/* CSV includes the header row; structured is one JSON object per line. */
BS_API bs_status bs_batch_render(const bs_batch* batch, bs_format format, char** out);
BS_API void bs_batch_free(bs_batch* batch);
BS_API const char* bs_csv_header(void);

/* --- synthetic frames ---------------------------------------------------- */

BS_API bs_gen_spec bs_gen_spec_default(void);
BS_API bs_status bs_gen_mucosa_frame(const bs_gen_spec* spec, bs_frame** out);
BS_API bs_status bs_gen_bleeding_frame(const bs_gen_spec* spec, bs_frame** out);
/* `frame` may be NULL for the default frame size; its seed is ignored. */
BS_API bs_status bs_gen_corpus(uint64_t seed, size_t count, double bleeding_fraction,
                               const char* out_dir, const bs_gen_spec* frame,
                               char** manifest_path);

/* --- evaluation ---------------------------------------------------------- */

BS_API bs_status bs_manifest_load(const char* path, bs_manifest** out);
BS_API size_t bs_manifest_size(const bs_manifest* manifest);
BS_API bs_status bs_manifest_get(const bs_manifest* manifest, size_t index, const char** path,
                                 bs_verdict* label);
BS_API void bs_manifest_free(bs_manifest* manifest);

BS_API bs_status bs_evaluate(const bs_manifest* manifest, const bs_rule* rule, uint64_t min_count,
                             unsigned workers, bs_report** out);
BS_API bs_status bs_report_get(const bs_report* report, bs_report_counts* out);
BS_API const char* bs_report_rule_id(const bs_report* report);
BS_API bs_status bs_render_table(const bs_report* const* reports, size_t count, char** out);
BS_API bs_status bs_reports_render(const bs_report* const* reports, size_t count,
                                   bs_format format, char** out);
BS_API void bs_report_free(bs_report* report);

#ifdef __cplusplus
}
#endif

#endif /* BLEEDSCAN_H */
