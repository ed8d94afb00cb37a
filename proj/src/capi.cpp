// extern "C" surface over the C++ core. Exceptions never cross this
// boundary; they become bs_status codes plus a thread-local message.

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "bleedscan/bleedscan.h"
#include "bleedscan/corpus_eval.hpp"
#include "bleedscan/error.hpp"
#include "bleedscan/frame_pipeline.hpp"
#include "bleedscan/pixel_model.hpp"
#include "bleedscan/synthgen.hpp"

struct bs_rule {
  bleedscan::ColorRangeRule rule;
};

struct bs_frame {
  bleedscan::Frame frame;
};

struct bs_batch {
  std::string rule_id;
  std::vector<bleedscan::BatchEntry> entries;
};

struct bs_manifest {
  std::vector<bleedscan::LabeledSample> samples;
};

struct bs_report {
  bleedscan::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

bs_status status_for(bleedscan::ErrorKind kind) {
  using bleedscan::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return BS_ERR_INVALID_ARGUMENT;
    case ErrorKind::Io: return BS_ERR_IO;
    case ErrorKind::UnsupportedFormat: return BS_ERR_UNSUPPORTED_FORMAT;
    case ErrorKind::BitDepth: return BS_ERR_BIT_DEPTH;
    case ErrorKind::Corrupt: return BS_ERR_CORRUPT;
    case ErrorKind::Parse: return BS_ERR_PARSE;
    case ErrorKind::Evaluation: return BS_ERR_EVALUATION;
  }
  return BS_ERR_INTERNAL;
}

bs_status fail(bs_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
bs_status guarded(Fn&& fn) {
  try {
    fn();
    return BS_OK;
  } catch (const bleedscan::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(BS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BS_ERR_INTERNAL, "unknown exception");
  }
}

#define BS_REQUIRE(cond, what) \
  do {                         \
    if (!(cond)) return fail(BS_ERR_INVALID_ARGUMENT, what); \
  } while (0)

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bs_frame_verdict to_c(const bleedscan::FrameVerdict& v) {
  return {v.matching_count, v.min_count,
          v.verdict == bleedscan::Verdict::Bleeding ? BS_BLEEDING : BS_NON_BLEEDING};
}

bleedscan::GenSpec from_c(const bs_gen_spec& s) {
  return bleedscan::GenSpec{s.seed, s.width, s.height, s.blob_fraction};
}

std::vector<std::string> path_list(const char* const* paths, size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    if (!paths[i]) throw bleedscan::Error(bleedscan::ErrorKind::InvalidArgument, "null path");
    out.emplace_back(paths[i]);
  }
  return out;
}

std::string render_record(const bleedscan::BatchEntry& e, const std::string& rule_id,
                          bs_format format) {
  return format == BS_FORMAT_STRUCTURED ? bleedscan::json_record(e, rule_id)
                                        : bleedscan::csv_record(e, rule_id);
}

std::vector<bleedscan::EvalReport> report_list(const bs_report* const* reports, size_t count) {
  std::vector<bleedscan::EvalReport> out;
  for (size_t i = 0; i < count; ++i) {
    if (!reports[i]) throw bleedscan::Error(bleedscan::ErrorKind::InvalidArgument, "null report");
    out.push_back(reports[i]->report);
  }
  return out;
}

bool valid_format(bs_format f) { return f == BS_FORMAT_CSV || f == BS_FORMAT_STRUCTURED; }

}  // namespace

extern "C" {

const char* bs_version(void) { return "1.0.0"; }

const char* bs_last_error(void) { return g_last_error.c_str(); }

const char* bs_status_string(bs_status status) {
  switch (status) {
    case BS_OK: return "ok";
    case BS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BS_ERR_IO: return "i/o error";
    case BS_ERR_UNSUPPORTED_FORMAT: return "unsupported format";
    case BS_ERR_BIT_DEPTH: return "unsupported bit depth";
    case BS_ERR_CORRUPT: return "corrupt data";
    case BS_ERR_PARSE: return "parse error";
    case BS_ERR_EVALUATION: return "evaluation error";
    case BS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void bs_string_free(char* s) { std::free(s); }

// --- rules -------------------------------------------------------------------

bs_status bs_rule_resolve(const char* source, bs_rule** out) {
  BS_REQUIRE(source && out, "bs_rule_resolve: null argument");
  return guarded([&] { *out = new bs_rule{bleedscan::resolve_rule(source)}; });
}

bs_status bs_rule_parse(const char* document, bs_rule** out) {
  BS_REQUIRE(document && out, "bs_rule_parse: null argument");
  return guarded([&] { *out = new bs_rule{bleedscan::parse_rule(document)}; });
}

bs_status bs_rule_create(const char* id, int r_lo, int r_hi, int g_lo, int g_hi, int b_lo,
                         int b_hi, bs_rule** out) {
  BS_REQUIRE(id && out, "bs_rule_create: null argument");
  return guarded([&] {
    using bleedscan::ChannelBound;
    *out = new bs_rule{bleedscan::ColorRangeRule(id, ChannelBound(r_lo, r_hi),
                                                 ChannelBound(g_lo, g_hi),
                                                 ChannelBound(b_lo, b_hi))};
  });
}

bs_status bs_rule_serialize(const bs_rule* rule, char** out) {
  BS_REQUIRE(rule && out, "bs_rule_serialize: null argument");
  return guarded([&] { *out = dup_string(bleedscan::serialize_rule(rule->rule)); });
}

bs_status bs_rule_volume(const bs_rule* rule, uint64_t* out) {
  BS_REQUIRE(rule && out, "bs_rule_volume: null argument");
  *out = bleedscan::rule_volume(rule->rule);
  return BS_OK;
}

bs_status bs_rule_bounds(const bs_rule* rule, uint8_t lo[3], uint8_t hi[3]) {
  BS_REQUIRE(rule && lo && hi, "bs_rule_bounds: null argument");
  const auto& r = rule->rule;
  lo[0] = r.r().lo(), lo[1] = r.g().lo(), lo[2] = r.b().lo();
  hi[0] = r.r().hi(), hi[1] = r.g().hi(), hi[2] = r.b().hi();
  return BS_OK;
}

bs_status bs_rule_pixel_matches(const bs_rule* rule, uint8_t r, uint8_t g, uint8_t b, int* out) {
  BS_REQUIRE(rule && out, "bs_rule_pixel_matches: null argument");
  *out = bleedscan::pixel_matches(bleedscan::Rgb8{r, g, b}, rule->rule) ? 1 : 0;
  return BS_OK;
}

const char* bs_rule_id(const bs_rule* rule) { return rule ? rule->rule.id().c_str() : nullptr; }

bs_status bs_rules_check_unique(const bs_rule* const* rules, size_t count) {
  BS_REQUIRE(rules || count == 0, "bs_rules_check_unique: null argument");
  return guarded([&] {
    std::vector<bleedscan::ColorRangeRule> list;
    for (size_t i = 0; i < count; ++i) {
      if (!rules[i]) throw bleedscan::Error(bleedscan::ErrorKind::InvalidArgument, "null rule");
      list.push_back(rules[i]->rule);
    }
    bleedscan::check_unique_ids(list);
  });
}

void bs_rule_free(bs_rule* rule) { delete rule; }

// --- frames ------------------------------------------------------------------

bs_status bs_frame_decode(const char* path, bs_frame** out) {
  BS_REQUIRE(path && out, "bs_frame_decode: null argument");
  return guarded([&] { *out = new bs_frame{bleedscan::decode_frame(path)}; });
}

bs_status bs_frame_from_rgb(size_t width, size_t height, const uint8_t* rgb, const char* source,
                            bs_frame** out) {
  BS_REQUIRE(rgb && out, "bs_frame_from_rgb: null argument");
  BS_REQUIRE(width >= 1 && height >= 1 && width <= SIZE_MAX / 3 / height,
             "bs_frame_from_rgb: bad dimensions");
  return guarded([&] {
    std::vector<bleedscan::Rgb8> pixels(width * height);
    std::memcpy(pixels.data(), rgb, pixels.size() * 3);
    *out = new bs_frame{bleedscan::Frame(width, height, std::move(pixels), source ? source : "")};
  });
}

size_t bs_frame_width(const bs_frame* frame) { return frame ? frame->frame.width() : 0; }

size_t bs_frame_height(const bs_frame* frame) { return frame ? frame->frame.height() : 0; }

const uint8_t* bs_frame_data(const bs_frame* frame) {
  return frame ? reinterpret_cast<const uint8_t*>(frame->frame.pixels().data()) : nullptr;
}

bs_status bs_frame_write_ppm(const bs_frame* frame, const char* path) {
  BS_REQUIRE(frame && path, "bs_frame_write_ppm: null argument");
  return guarded([&] { bleedscan::write_ppm(frame->frame, path); });
}

bs_status bs_frame_count_matching(const bs_frame* frame, const bs_rule* rule, uint64_t* out) {
  BS_REQUIRE(frame && rule && out, "bs_frame_count_matching: null argument");
  *out = bleedscan::count_matching(frame->frame, rule->rule);
  return BS_OK;
}

bs_status bs_frame_classify(const bs_frame* frame, const bs_rule* rule, uint64_t min_count,
                            bs_frame_verdict* out) {
  BS_REQUIRE(frame && rule && out, "bs_frame_classify: null argument");
  return guarded([&] { *out = to_c(bleedscan::classify_frame(frame->frame, rule->rule, min_count)); });
}

void bs_frame_free(bs_frame* frame) { delete frame; }

// --- batch -------------------------------------------------------------------

bs_status bs_classify_batch(const char* const* paths, size_t count, const bs_rule* rule,
                            uint64_t min_count, unsigned workers, bs_batch** out) {
  BS_REQUIRE((paths || count == 0) && rule && out, "bs_classify_batch: null argument");
  return guarded([&] {
    auto entries = bleedscan::classify_batch(path_list(paths, count), rule->rule, min_count, workers);
    *out = new bs_batch{rule->rule.id(), std::move(entries)};
  });
}

bs_status bs_classify_batch_stream(const char* const* paths, size_t count, const bs_rule* rule,
                                   uint64_t min_count, unsigned workers, bs_format format,
                                   bs_record_callback callback, void* ctx) {
  BS_REQUIRE((paths || count == 0) && rule && callback, "bs_classify_batch_stream: null argument");
  BS_REQUIRE(valid_format(format), "bs_classify_batch_stream: unknown format");
  return guarded([&] {
    const std::string& id = rule->rule.id();
    bleedscan::classify_batch(path_list(paths, count), rule->rule, min_count, workers,
                              [&](std::size_t i, const bleedscan::BatchEntry& e) {
                                callback(ctx, i, render_record(e, id, format).c_str());
                              });
  });
}

size_t bs_batch_size(const bs_batch* batch) { return batch ? batch->entries.size() : 0; }

bs_status bs_batch_get(const bs_batch* batch, size_t index, bs_batch_entry* out) {
  BS_REQUIRE(batch && out, "bs_batch_get: null argument");
  BS_REQUIRE(index < batch->entries.size(), "bs_batch_get: index out of range");
  const auto& e = batch->entries[index];
  out->source = e.source.c_str();
  out->ok = e.ok() ? 1 : 0;
  out->verdict = e.ok() ? to_c(*e.verdict) : bs_frame_verdict{0, 0, BS_NON_BLEEDING};
  out->error = e.ok() ? nullptr : e.error.c_str();
  return BS_OK;
}

bs_status bs_batch_render(const bs_batch* batch, bs_format format, char** out) {
  BS_REQUIRE(batch && out, "bs_batch_render: null argument");
  BS_REQUIRE(valid_format(format), "bs_batch_render: unknown format");
  return guarded([&] {
    std::string text = format == BS_FORMAT_CSV ? bleedscan::csv_header() + "\n" : std::string();
    for (const auto& e : batch->entries) text += render_record(e, batch->rule_id, format) + "\n";
    *out = dup_string(text);
  });
}

void bs_batch_free(bs_batch* batch) { delete batch; }

const char* bs_csv_header(void) {
  static const std::string header = bleedscan::csv_header();
  return header.c_str();
}

// --- synthetic frames --------------------------------------------------------

bs_gen_spec bs_gen_spec_default(void) {
  const bleedscan::GenSpec d;
  return bs_gen_spec{d.seed, d.width, d.height, d.blob_fraction};
}

bs_status bs_gen_mucosa_frame(const bs_gen_spec* spec, bs_frame** out) {
  BS_REQUIRE(spec && out, "bs_gen_mucosa_frame: null argument");
  return guarded([&] { *out = new bs_frame{bleedscan::gen_mucosa_frame(from_c(*spec))}; });
}

bs_status bs_gen_bleeding_frame(const bs_gen_spec* spec, bs_frame** out) {
  BS_REQUIRE(spec && out, "bs_gen_bleeding_frame: null argument");
  return guarded([&] { *out = new bs_frame{bleedscan::gen_bleeding_frame(from_c(*spec))}; });
}

bs_status bs_gen_corpus(uint64_t seed, size_t count, double bleeding_fraction, const char* out_dir,
                        const bs_gen_spec* frame, char** manifest_path) {
  BS_REQUIRE(out_dir && manifest_path, "bs_gen_corpus: null argument");
  return guarded([&] {
    const auto manifest =
        frame ? bleedscan::gen_corpus(seed, count, bleeding_fraction, out_dir, from_c(*frame))
              : bleedscan::gen_corpus(seed, count, bleeding_fraction, out_dir);
    *manifest_path = dup_string(manifest.string());
  });
}

// --- evaluation --------------------------------------------------------------

bs_status bs_manifest_load(const char* path, bs_manifest** out) {
  BS_REQUIRE(path && out, "bs_manifest_load: null argument");
  return guarded([&] { *out = new bs_manifest{bleedscan::load_manifest(path)}; });
}

size_t bs_manifest_size(const bs_manifest* manifest) {
  return manifest ? manifest->samples.size() : 0;
}

bs_status bs_manifest_get(const bs_manifest* manifest, size_t index, const char** path,
                          bs_verdict* label) {
  BS_REQUIRE(manifest && path && label, "bs_manifest_get: null argument");
  BS_REQUIRE(index < manifest->samples.size(), "bs_manifest_get: index out of range");
  const auto& s = manifest->samples[index];
  *path = s.path.c_str();
  *label = s.label == bleedscan::Verdict::Bleeding ? BS_BLEEDING : BS_NON_BLEEDING;
  return BS_OK;
}

void bs_manifest_free(bs_manifest* manifest) { delete manifest; }

bs_status bs_evaluate(const bs_manifest* manifest, const bs_rule* rule, uint64_t min_count,
                      unsigned workers, bs_report** out) {
  BS_REQUIRE(manifest && rule && out, "bs_evaluate: null argument");
  return guarded([&] {
    *out = new bs_report{bleedscan::evaluate(manifest->samples, rule->rule, min_count, workers)};
  });
}

bs_status bs_report_get(const bs_report* report, bs_report_counts* out) {
  BS_REQUIRE(report && out, "bs_report_get: null argument");
  const auto& r = report->report;
  *out = bs_report_counts{r.min_count,
                          r.n(),
                          r.tp,
                          r.fp,
                          r.tn,
                          r.fn,
                          r.predicted_bleeding(),
                          r.predicted_non_bleeding(),
                          r.correct(),
                          r.decode_failures,
                          r.accuracy()};
  return BS_OK;
}

const char* bs_report_rule_id(const bs_report* report) {
  return report ? report->report.rule_id.c_str() : nullptr;
}

bs_status bs_render_table(const bs_report* const* reports, size_t count, char** out) {
  BS_REQUIRE((reports || count == 0) && out, "bs_render_table: null argument");
  return guarded([&] { *out = dup_string(bleedscan::render_table(report_list(reports, count))); });
}

bs_status bs_reports_render(const bs_report* const* reports, size_t count, bs_format format,
                            char** out) {
  BS_REQUIRE((reports || count == 0) && out, "bs_reports_render: null argument");
  BS_REQUIRE(valid_format(format), "bs_reports_render: unknown format");
  return guarded([&] {
    const auto list = report_list(reports, count);
    *out = dup_string(format == BS_FORMAT_STRUCTURED ? bleedscan::reports_to_json(list)
                                                     : bleedscan::reports_to_csv(list));
  });
}

void bs_report_free(bs_report* report) { delete report; }

}  // extern "C"
