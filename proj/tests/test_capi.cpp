// Exercises the shared library through bleedscan.h only.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bleedscan/bleedscan.h"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("bleedscan_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  bs_string_free(s);
  return out;
}

bs_rule* preset(const char* name) {
  bs_rule* rule = nullptr;
  REQUIRE(bs_rule_resolve(name, &rule) == BS_OK);
  return rule;
}

}  // namespace

TEST_CASE("rules through the C API") {
  bs_rule* range = preset("range_ratio");
  CHECK(std::string(bs_rule_id(range)) == "range_ratio");
  uint64_t volume = 0;
  CHECK(bs_rule_volume(range, &volume) == BS_OK);
  CHECK(volume == 10176);

  uint8_t lo[3], hi[3];
  CHECK(bs_rule_bounds(range, lo, hi) == BS_OK);
  CHECK(lo[0] == 75);
  CHECK(hi[0] == 127);
  CHECK(lo[1] == 14);
  CHECK(hi[1] == 25);
  CHECK(lo[2] == 0);
  CHECK(hi[2] == 15);

  int match = -1;
  CHECK(bs_rule_pixel_matches(range, 100, 20, 10, &match) == BS_OK);
  CHECK(match == 1);
  CHECK(bs_rule_pixel_matches(range, 128, 20, 10, &match) == BS_OK);
  CHECK(match == 0);

  char* doc = nullptr;
  CHECK(bs_rule_serialize(range, &doc) == BS_OK);
  bs_rule* parsed = nullptr;
  CHECK(bs_rule_parse(doc, &parsed) == BS_OK);
  bs_string_free(doc);
  uint8_t lo2[3], hi2[3];
  bs_rule_bounds(parsed, lo2, hi2);
  CHECK(std::memcmp(lo, lo2, 3) == 0);
  CHECK(std::memcmp(hi, hi2, 3) == 0);

  bs_rule* bad = nullptr;
  CHECK(bs_rule_parse(R"({"id":"x","r":{"lo":0,"hi":1},"g":{"lo":30,"hi":25},"b":{"lo":0,"hi":1}})",
                      &bad) == BS_ERR_PARSE);
  CHECK(bad == nullptr);
  CHECK(std::string(bs_last_error()) == "g: lo > hi");

  CHECK(bs_rule_create("x", 5, 4, 0, 0, 0, 0, &bad) == BS_ERR_INVALID_ARGUMENT);
  bs_rule* custom = nullptr;
  CHECK(bs_rule_create("x", 0, 255, 0, 255, 0, 255, &custom) == BS_OK);
  bs_rule_volume(custom, &volume);
  CHECK(volume == 16777216);

  const bs_rule* unique[] = {range, custom};
  CHECK(bs_rules_check_unique(unique, 2) == BS_OK);
  const bs_rule* dup[] = {range, parsed};
  CHECK(bs_rules_check_unique(dup, 2) == BS_ERR_INVALID_ARGUMENT);

  CHECK(bs_rule_resolve("no_such_rule", &bad) == BS_ERR_IO);
  CHECK(bs_rule_volume(nullptr, &volume) == BS_ERR_INVALID_ARGUMENT);

  bs_rule_free(range);
  bs_rule_free(parsed);
  bs_rule_free(custom);
  bs_rule_free(nullptr);
}

TEST_CASE("frames and verdicts through the C API") {
  const auto dir = scratch("frames");
  const uint8_t rgb[] = {255, 0, 0, 0, 0, 0, 75, 14, 0, 200, 200, 200};
  bs_frame* frame = nullptr;
  REQUIRE(bs_frame_from_rgb(2, 2, rgb, "fixture", &frame) == BS_OK);
  CHECK(bs_frame_width(frame) == 2);
  CHECK(bs_frame_height(frame) == 2);
  CHECK(std::memcmp(bs_frame_data(frame), rgb, sizeof rgb) == 0);

  const auto path = (dir / "four.ppm").string();
  CHECK(bs_frame_write_ppm(frame, path.c_str()) == BS_OK);
  bs_frame* decoded = nullptr;
  REQUIRE(bs_frame_decode(path.c_str(), &decoded) == BS_OK);
  CHECK(std::memcmp(bs_frame_data(decoded), rgb, sizeof rgb) == 0);

  bs_rule* purity = preset("purity_red");
  bs_rule* range = preset("range_ratio");
  uint64_t count = 0;
  CHECK(bs_frame_count_matching(decoded, purity, &count) == BS_OK);
  CHECK(count == 1);
  CHECK(bs_frame_count_matching(decoded, range, &count) == BS_OK);
  CHECK(count == 1);

  bs_frame_verdict v{};
  CHECK(bs_frame_classify(decoded, range, 1, &v) == BS_OK);
  CHECK(v.verdict == BS_BLEEDING);
  CHECK(v.matching_count == 1);
  CHECK(bs_frame_classify(decoded, range, 2, &v) == BS_OK);
  CHECK(v.verdict == BS_NON_BLEEDING);
  CHECK(bs_frame_classify(decoded, range, 0, &v) == BS_ERR_INVALID_ARGUMENT);

  std::ofstream(dir / "hello.txt") << "hello";
  bs_frame* bad = nullptr;
  CHECK(bs_frame_decode((dir / "hello.txt").string().c_str(), &bad) == BS_ERR_UNSUPPORTED_FORMAT);
  std::ofstream(dir / "deep.ppm", std::ios::binary) << "P6 1 1 65535\n" << std::string(6, '\0');
  CHECK(bs_frame_decode((dir / "deep.ppm").string().c_str(), &bad) == BS_ERR_BIT_DEPTH);
  CHECK(bs_frame_decode((dir / "none.ppm").string().c_str(), &bad) == BS_ERR_IO);
  CHECK(bs_frame_from_rgb(0, 2, rgb, nullptr, &bad) == BS_ERR_INVALID_ARGUMENT);

  bs_frame_free(frame);
  bs_frame_free(decoded);
  bs_rule_free(purity);
  bs_rule_free(range);
}

namespace {

struct Collected {
  std::vector<size_t> indices;
  std::vector<std::string> records;
};

void collect(void* ctx, size_t index, const char* record) {
  auto* c = static_cast<Collected*>(ctx);
  c->indices.push_back(index);
  c->records.emplace_back(record);
}

}  // namespace

TEST_CASE("batch, generation and evaluation through the C API") {
  const auto dir = scratch("pipeline");
  bs_gen_spec spec = bs_gen_spec_default();
  spec.width = 32;
  spec.height = 32;
  char* manifest_path = nullptr;
  REQUIRE(bs_gen_corpus(42, 20, 0.5, (dir / "corpus").string().c_str(), &spec, &manifest_path) ==
          BS_OK);
  const std::string manifest_file = take(manifest_path);
  CHECK(manifest_file == (dir / "corpus" / "manifest.csv").string());

  bs_manifest* manifest = nullptr;
  REQUIRE(bs_manifest_load(manifest_file.c_str(), &manifest) == BS_OK);
  REQUIRE(bs_manifest_size(manifest) == 20);

  std::vector<std::string> paths;
  std::vector<bs_verdict> labels;
  for (size_t i = 0; i < 20; ++i) {
    const char* p = nullptr;
    bs_verdict label{};
    REQUIRE(bs_manifest_get(manifest, i, &p, &label) == BS_OK);
    paths.emplace_back(p);
    labels.push_back(label);
  }
  paths.insert(paths.begin() + 3, (dir / "missing.ppm").string());
  std::vector<const char*> cpaths;
  for (const auto& p : paths) cpaths.push_back(p.c_str());

  bs_rule* range = preset("range_ratio");
  bs_batch* serial = nullptr;
  REQUIRE(bs_classify_batch(cpaths.data(), cpaths.size(), range, 1, 1, &serial) == BS_OK);
  REQUIRE(bs_batch_size(serial) == 21);
  bs_batch_entry e{};
  CHECK(bs_batch_get(serial, 3, &e) == BS_OK);
  CHECK(e.ok == 0);
  CHECK(std::string(e.error).find("cannot open") != std::string::npos);
  CHECK(bs_batch_get(serial, 0, &e) == BS_OK);
  CHECK(e.ok == 1);
  CHECK(e.verdict.verdict == labels[0]);
  CHECK(bs_batch_get(serial, 99, &e) == BS_ERR_INVALID_ARGUMENT);

  char* csv = nullptr;
  CHECK(bs_batch_render(serial, BS_FORMAT_CSV, &csv) == BS_OK);
  const std::string csv_text = take(csv);
  CHECK(csv_text.rfind(std::string(bs_csv_header()) + "\n", 0) == 0);
  CHECK(csv_text.find(",range_ratio,,,\"error:") != std::string::npos);

  for (unsigned workers : {2u, 8u}) {
    bs_batch* parallel = nullptr;
    REQUIRE(bs_classify_batch(cpaths.data(), cpaths.size(), range, 1, workers, &parallel) == BS_OK);
    char* other = nullptr;
    bs_batch_render(parallel, BS_FORMAT_CSV, &other);
    CHECK(take(other) == csv_text);
    bs_batch_free(parallel);
  }

  Collected streamed;
  CHECK(bs_classify_batch_stream(cpaths.data(), cpaths.size(), range, 1, 4, BS_FORMAT_CSV, collect,
                                 &streamed) == BS_OK);
  REQUIRE(streamed.records.size() == 21);
  std::string joined = std::string(bs_csv_header()) + "\n";
  for (size_t i = 0; i < streamed.records.size(); ++i) {
    CHECK(streamed.indices[i] == i);
    joined += streamed.records[i] + "\n";
  }
  CHECK(joined == csv_text);

  Collected structured;
  CHECK(bs_classify_batch_stream(cpaths.data(), 2, range, 1, 1, BS_FORMAT_STRUCTURED, collect,
                                 &structured) == BS_OK);
  CHECK(structured.records[0].rfind("{\"source\":", 0) == 0);

  bs_report* report = nullptr;
  REQUIRE(bs_evaluate(manifest, range, 1, 2, &report) == BS_OK);
  bs_report_counts counts{};
  CHECK(bs_report_get(report, &counts) == BS_OK);
  CHECK(counts.tp == 10);
  CHECK(counts.tn == 10);
  CHECK(counts.fp == 0);
  CHECK(counts.fn == 0);
  CHECK(counts.n == 20);
  CHECK(counts.accuracy == 1.0);
  CHECK(std::string(bs_report_rule_id(report)) == "range_ratio");

  bs_rule* purity = preset("purity_red");
  bs_report* purity_report = nullptr;
  REQUIRE(bs_evaluate(manifest, purity, 1, 2, &purity_report) == BS_OK);
  bs_report_get(purity_report, &counts);
  CHECK(counts.predicted_bleeding == 0);
  CHECK(counts.accuracy == 0.5);

  const bs_report* both[] = {purity_report, report};
  char* table = nullptr;
  CHECK(bs_render_table(both, 2, &table) == BS_OK);
  const std::string table_text = take(table);
  CHECK(table_text.find("purity_red") != std::string::npos);
  CHECK(table_text.find("100%") != std::string::npos);
  CHECK(bs_render_table(both, 0, &table) == BS_ERR_INVALID_ARGUMENT);

  char* json = nullptr;
  CHECK(bs_reports_render(both, 2, BS_FORMAT_STRUCTURED, &json) == BS_OK);
  CHECK(take(json).find("\"decode_failures\": 0") != std::string::npos);

  CHECK(bs_gen_corpus(1, 1, 0.5, (dir / "tiny").string().c_str(), nullptr, &manifest_path) ==
        BS_ERR_INVALID_ARGUMENT);

  bs_report_free(report);
  bs_report_free(purity_report);
  bs_batch_free(serial);
  bs_manifest_free(manifest);
  bs_rule_free(range);
  bs_rule_free(purity);
}

TEST_CASE("synthetic frames through the C API") {
  bs_gen_spec spec = bs_gen_spec_default();
  spec.seed = 7;
  bs_frame* a = nullptr;
  bs_frame* b = nullptr;
  REQUIRE(bs_gen_bleeding_frame(&spec, &a) == BS_OK);
  REQUIRE(bs_gen_bleeding_frame(&spec, &b) == BS_OK);
  CHECK(std::memcmp(bs_frame_data(a), bs_frame_data(b), 64 * 64 * 3) == 0);
  bs_rule* range = preset("range_ratio");
  uint64_t count = 0;
  bs_frame_count_matching(a, range, &count);
  CHECK(count >= 82);
  bs_frame* m = nullptr;
  REQUIRE(bs_gen_mucosa_frame(&spec, &m) == BS_OK);
  bs_frame_count_matching(m, range, &count);
  CHECK(count == 0);

  spec.width = 8;
  bs_frame* bad = nullptr;
  CHECK(bs_gen_mucosa_frame(&spec, &bad) == BS_ERR_INVALID_ARGUMENT);
  CHECK(std::string(bs_status_string(BS_ERR_BIT_DEPTH)) == "unsupported bit depth");

  bs_frame_free(a);
  bs_frame_free(b);
  bs_frame_free(m);
  bs_rule_free(range);
}
