#include "bleedscan/corpus_eval.hpp"

#include <fstream>
#include <sstream>

#include "bleedscan/error.hpp"
#include "json.hpp"

namespace bleedscan {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void manifest_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Parse, "manifest line " + std::to_string(line) + ": " + what);
}

std::string pad(const std::string& s, std::size_t width, bool left) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

std::vector<LabeledSample> parse_manifest(const std::string& text,
                                          const std::filesystem::path& base_dir) {
  std::vector<LabeledSample> samples;
  std::istringstream in(text);
  std::string raw;
  for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    // Paths may contain commas; the label is after the last one.
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) manifest_error(line_no, "expected <path>,<label>");
    const std::string path = trim(std::string_view(line).substr(0, comma));
    const std::string label = trim(std::string_view(line).substr(comma + 1));
    if (path.empty()) manifest_error(line_no, "empty path");

    LabeledSample sample;
    if (label == "bleeding") {
      sample.label = Verdict::Bleeding;
    } else if (label == "non_bleeding") {
      sample.label = Verdict::NonBleeding;
    } else {
      manifest_error(line_no, "unknown label '" + label + "'");
    }
    const std::filesystem::path p(path);
    sample.path = p.is_absolute() || base_dir.empty() ? p.string() : (base_dir / p).string();
    samples.push_back(std::move(sample));
  }
  if (samples.empty()) throw Error(ErrorKind::Parse, "empty manifest");
  return samples;
}

std::vector<LabeledSample> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read manifest: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_manifest(buf.str(), path.parent_path());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string format_manifest(const std::vector<LabeledSample>& samples, const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  for (const auto& s : samples) {
    out += s.path + "," + verdict_token(s.label) + "\n";
  }
  return out;
}

double EvalReport::accuracy() const noexcept {
  return n() == 0 ? 0.0 : double(correct()) / double(n());
}

std::uint64_t EvalReport::accuracy_permille() const noexcept {
  if (n() == 0) return 0;
  return (correct() * 2000 + n()) / (2 * n());
}

void tally(EvalReport& report, Verdict label, Verdict predicted) noexcept {
  const bool positive = predicted == Verdict::Bleeding;
  if (label == predicted) {
    ++(positive ? report.tp : report.tn);
  } else {
    ++(positive ? report.fp : report.fn);
  }
}

EvalReport evaluate(const std::vector<LabeledSample>& samples, const ColorRangeRule& rule,
                    std::uint64_t min_count, unsigned workers) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "evaluate: no samples");
  std::vector<std::string> paths;
  paths.reserve(samples.size());
  for (const auto& s : samples) paths.push_back(s.path);

  const auto entries = classify_batch(paths, rule, min_count, workers);
  EvalReport report;
  report.rule_id = rule.id();
  report.min_count = min_count;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].ok()) {
      ++report.decode_failures;
      continue;
    }
    tally(report, samples[i].label, entries[i].verdict->verdict);
  }
  if (report.n() == 0) {
    throw Error(ErrorKind::Evaluation, "evaluate: all " + std::to_string(samples.size()) +
                                           " samples failed to decode");
  }
  return report;
}

std::string format_accuracy(const EvalReport& report) {
  const auto permille = report.accuracy_permille();
  std::string out = std::to_string(permille / 10);
  if (permille % 10 != 0) out += "." + std::to_string(permille % 10);
  return out + "%";
}

std::string render_table(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw Error(ErrorKind::InvalidArgument, "render_table: no reports");

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Classification", "Bleeding predictions", "Non-bleeding predictions",
                  "Total correct", "Accuracy"});
  for (const auto& r : reports) {
    rows.push_back({r.rule_id, std::to_string(r.predicted_bleeding()),
                    std::to_string(r.predicted_non_bleeding()), std::to_string(r.correct()),
                    format_accuracy(r)});
  }
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += pad(row[c], widths[c], c == 0);
    }
    out += line + "\n";
  }
  return out;
}

std::string reports_to_json(const std::vector<EvalReport>& reports) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["rule_id"] = r.rule_id;
    j["min_count"] = r.min_count;
    j["n"] = r.n();
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["tn"] = r.tn;
    j["fn"] = r.fn;
    j["predicted_bleeding"] = r.predicted_bleeding();
    j["predicted_non_bleeding"] = r.predicted_non_bleeding();
    j["correct"] = r.correct();
    j["accuracy"] = r.accuracy();
    j["decode_failures"] = r.decode_failures;
    list.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["reports"] = std::move(list);
  return doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
  std::string out =
      "rule_id,min_count,n,tp,fp,tn,fn,predicted_bleeding,predicted_non_bleeding,correct,"
      "accuracy,decode_failures\n";
  for (const auto& r : reports) {
    out += r.rule_id + "," + std::to_string(r.min_count) + "," + std::to_string(r.n()) + "," +
           std::to_string(r.tp) + "," + std::to_string(r.fp) + "," + std::to_string(r.tn) + "," +
           std::to_string(r.fn) + "," + std::to_string(r.predicted_bleeding()) + "," +
           std::to_string(r.predicted_non_bleeding()) + "," + std::to_string(r.correct()) + "," +
           nlohmann::json(r.accuracy()).dump() + "," + std::to_string(r.decode_failures) + "\n";
  }
  return out;
}

}  // namespace bleedscan
