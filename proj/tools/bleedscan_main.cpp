// bleedscan command-line tool. Talks to the library only through the C API.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bleedscan/bleedscan.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

// Thrown for failures that map onto an exit status.
struct CommandError {
  int exit_code;
  std::string message;
};

int exit_code_for(bs_status status) {
  return status == BS_ERR_INTERNAL ? kExitInternal : kExitUsage;
}

void check(bs_status status) {
  if (status != BS_OK) throw CommandError{exit_code_for(status), bs_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using RulePtr = std::unique_ptr<bs_rule, Deleter<bs_rule, bs_rule_free>>;
using BatchPtr = std::unique_ptr<bs_batch, Deleter<bs_batch, bs_batch_free>>;
using ManifestPtr = std::unique_ptr<bs_manifest, Deleter<bs_manifest, bs_manifest_free>>;
using ReportPtr = std::unique_ptr<bs_report, Deleter<bs_report, bs_report_free>>;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { bs_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

RulePtr resolve_rule(const std::string& source) {
  bs_rule* rule = nullptr;
  check(bs_rule_resolve(source.c_str(), &rule));
  return RulePtr(rule);
}

bs_format parse_format(const std::string& name) {
  return name == "structured" ? BS_FORMAT_STRUCTURED : BS_FORMAT_CSV;
}

// Output sink: stdout or a file opened for the whole command.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") {
      file_ = stdout;
    } else {
      file_ = std::fopen(path.c_str(), "wb");
      if (!file_) throw CommandError{kExitUsage, "cannot open output file: " + path};
      owned_ = true;
    }
  }
  Output(const Output&) = delete;
  Output& operator=(const Output&) = delete;
  ~Output() {
    if (owned_) std::fclose(file_);
  }

  void write(const std::string& text) { std::fwrite(text.data(), 1, text.size(), file_); }
  void line(const std::string& text) { write(text + "\n"); }
  std::FILE* file() const { return file_; }

  void finish() {
    if (std::fflush(file_) != 0 || std::ferror(file_)) {
      throw CommandError{kExitInternal, "write to output failed"};
    }
  }

 private:
  std::FILE* file_ = nullptr;
  bool owned_ = false;
};

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const char* known : {".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm"}) {
    if (ext == known) return true;
  }
  return false;
}

// Directory: image files sorted lexicographically by path. List file: one path
// per line in the given order, relative entries resolved against the list's
// directory.
std::vector<std::string> batch_inputs(const std::string& input) {
  std::error_code ec;
  std::vector<std::string> paths;
  if (fs::is_directory(input, ec)) {
    for (const auto& entry : fs::directory_iterator(input, ec)) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        paths.push_back(entry.path().string());
      }
    }
    if (ec) throw CommandError{kExitUsage, "cannot list directory: " + input};
    std::sort(paths.begin(), paths.end());
    return paths;
  }
  std::ifstream list(input);
  if (!list) throw CommandError{kExitUsage, "cannot read batch input: " + input};
  const fs::path base = fs::path(input).parent_path();
  std::string line;
  while (std::getline(list, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const fs::path p(line);
    paths.push_back(p.is_absolute() || base.empty() ? p.string() : (base / p).string());
  }
  return paths;
}

struct Options {
  std::string image;
  std::string batch_input;
  std::string rule = "range_ratio";
  std::vector<std::string> eval_rules;
  std::string manifest;
  std::uint64_t min_count = 1;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string output;
  std::string format = "csv";
  std::string eval_format = "structured";
  bool table = false;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double bleeding_fraction = 0.5;
  std::string out_dir;
  std::size_t width = 128;
  std::size_t height = 128;
  double blob_fraction = 0.02;
};

int run_classify(const Options& o) {
  auto rule = resolve_rule(o.rule);
  const char* paths[] = {o.image.c_str()};
  bs_batch* raw = nullptr;
  check(bs_classify_batch(paths, 1, rule.get(), o.min_count, 1, &raw));
  BatchPtr batch(raw);

  Output out(o.output);
  OwnedString text;
  check(bs_batch_render(batch.get(), parse_format(o.format), &text.ptr));
  out.write(text.str());
  out.finish();

  bs_batch_entry entry{};
  check(bs_batch_get(batch.get(), 0, &entry));
  if (!entry.ok) {
    std::cerr << "bleedscan: " << o.image << ": " << entry.error << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

void write_record(void* ctx, size_t, const char* record) {
  auto* out = static_cast<Output*>(ctx);
  out->line(record);
}

int run_batch(const Options& o) {
  auto rule = resolve_rule(o.rule);
  const auto inputs = batch_inputs(o.batch_input);
  std::vector<const char*> paths;
  paths.reserve(inputs.size());
  for (const auto& p : inputs) paths.push_back(p.c_str());

  Output out(o.output);
  const bs_format format = parse_format(o.format);
  if (format == BS_FORMAT_CSV) out.line(bs_csv_header());
  check(bs_classify_batch_stream(paths.data(), paths.size(), rule.get(), o.min_count, o.workers,
                                 format, write_record, &out));
  out.finish();
  return kExitOk;
}

int run_eval(const Options& o) {
  bs_manifest* raw_manifest = nullptr;
  check(bs_manifest_load(o.manifest.c_str(), &raw_manifest));
  ManifestPtr manifest(raw_manifest);

  std::vector<RulePtr> rules;
  std::vector<const bs_rule*> rule_views;
  for (const auto& source : o.eval_rules) {
    rules.push_back(resolve_rule(source));
    rule_views.push_back(rules.back().get());
  }
  check(bs_rules_check_unique(rule_views.data(), rule_views.size()));

  std::vector<ReportPtr> reports;
  std::vector<const bs_report*> report_views;
  for (const auto* rule : rule_views) {
    bs_report* raw = nullptr;
    check(bs_evaluate(manifest.get(), rule, o.min_count, o.workers, &raw));
    reports.emplace_back(raw);
    report_views.push_back(raw);
  }

  Output out(o.output);
  if (o.table) {
    OwnedString table;
    check(bs_render_table(report_views.data(), report_views.size(), &table.ptr));
    std::fputs(table.str().c_str(), stdout);
    if (out.file() == stdout) out.line("");
  }
  OwnedString doc;
  check(bs_reports_render(report_views.data(), report_views.size(), parse_format(o.eval_format),
                          &doc.ptr));
  out.write(doc.str());
  out.finish();
  return kExitOk;
}

int run_gen(const Options& o) {
  bs_gen_spec spec = bs_gen_spec_default();
  spec.width = o.width;
  spec.height = o.height;
  spec.blob_fraction = o.blob_fraction;
  OwnedString manifest;
  check(bs_gen_corpus(o.seed, o.n, o.bleeding_fraction, o.out_dir.c_str(), &spec, &manifest.ptr));
  std::cout << manifest.str() << "\n";
  return kExitOk;
}

int run_volume(const Options& o) {
  auto rule = resolve_rule(o.rule);
  std::uint64_t volume = 0;
  check(bs_rule_volume(rule.get(), &volume));
  std::cout << volume << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Bleeding-frame detection for capsule endoscopy images by RGB range rules"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bs_version());

  const auto rule_help = "purity_red, range_ratio, or a rule document path";
  const auto format_check = CLI::IsMember({"csv", "structured"});
  const auto positive = CLI::Range(std::uint64_t{1}, UINT64_MAX);

  auto* classify = app.add_subcommand("classify", "Classify one image");
  classify->add_option("image", o.image, "Image file (PNG, JPEG, BMP, PPM)")->required();
  classify->add_option("--rule", o.rule, rule_help);
  classify->add_option("--min-count", o.min_count, "Matching pixels needed for a bleeding verdict")
      ->check(positive);
  classify->add_option("--format", o.format, "csv or structured")->check(format_check);
  classify->add_option("--output", o.output, "Output file (default: stdout)");

  auto* batch = app.add_subcommand("batch", "Classify a directory or a list of images");
  batch->add_option("input", o.batch_input, "Directory (sorted by name) or list file")->required();
  batch->add_option("--rule", o.rule, rule_help);
  batch->add_option("--min-count", o.min_count, "Matching pixels needed for a bleeding verdict")
      ->check(positive);
  batch->add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1u, 4096u));
  batch->add_option("--format", o.format, "csv or structured")->check(format_check);
  batch->add_option("--output", o.output, "Output file (default: stdout)");

  auto* eval = app.add_subcommand("eval", "Evaluate rules against a labeled manifest");
  eval->add_option("--manifest", o.manifest, "Manifest file")->required();
  eval->add_option("--rule", o.eval_rules, "Rule to evaluate (repeatable)")->required();
  eval->add_option("--min-count", o.min_count, "Matching pixels needed for a bleeding verdict")
      ->check(positive);
  eval->add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1u, 4096u));
  eval->add_flag("--table", o.table, "Also print the comparison table");
  eval->add_option("--format", o.eval_format, "Report encoding: structured or csv")
      ->check(format_check);
  eval->add_option("--output", o.output, "Report file (default: stdout)");

  auto* gen = app.add_subcommand("gen", "Generate a labeled synthetic corpus");
  gen->add_option("--seed", o.seed, "Generator seed")->required();
  gen->add_option("--n", o.n, "Number of frames")->required();
  gen->add_option("--bleeding-fraction", o.bleeding_fraction, "Fraction of bleeding frames")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--out", o.out_dir, "Output directory")->required();
  gen->add_option("--width", o.width, "Frame width")->check(CLI::Range(std::size_t{16}, std::size_t{16384}));
  gen->add_option("--height", o.height, "Frame height")->check(CLI::Range(std::size_t{16}, std::size_t{16384}));
  gen->add_option("--blob-fraction", o.blob_fraction, "Minimum blob area fraction")
      ->check(CLI::Range(0.0, 0.25));

  auto* volume = app.add_subcommand("volume", "Print the number of colors a rule matches");
  volume->add_option("--rule", o.rule, rule_help)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*classify) return run_classify(o);
    if (*batch) return run_batch(o);
    if (*eval) return run_eval(o);
    if (*gen) return run_gen(o);
    if (*volume) return run_volume(o);
  } catch (const CommandError& e) {
    std::cerr << "bleedscan: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "bleedscan: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
