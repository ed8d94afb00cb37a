#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bleedscan/frame_pipeline.hpp"

namespace bleedscan {

struct LabeledSample {
  std::string path;
  Verdict label = Verdict::NonBleeding;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Manifest format: one `<path>,<label>` per line, label is `bleeding` or
/// `non_bleeding`, `#` lines and blank lines are skipped. Relative paths are
/// resolved against the manifest's directory.
std::vector<LabeledSample> load_manifest(const std::filesystem::path& path);

/// Parses manifest text; `base_dir` resolves relative paths.
std::vector<LabeledSample> parse_manifest(const std::string& text,
                                          const std::filesystem::path& base_dir);

/// Inverse of parse_manifest for paths already relative to the manifest.
std::string format_manifest(const std::vector<LabeledSample>& samples,
                            const std::string& comment = {});

/// Confusion matrix of one rule over a labeled corpus. Bleeding is the
/// positive class. Undecodable samples are excluded from `n`.
struct EvalReport {
  std::string rule_id;
  std::uint64_t min_count = 1;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
  std::uint64_t decode_failures = 0;

  std::uint64_t n() const noexcept { return tp + fp + tn + fn; }
  std::uint64_t predicted_bleeding() const noexcept { return tp + fp; }
  std::uint64_t predicted_non_bleeding() const noexcept { return tn + fn; }
  std::uint64_t correct() const noexcept { return tp + tn; }
  /// correct / n; 0 when n == 0.
  double accuracy() const noexcept;
  /// Accuracy in tenths of a percent, rounded half up from the exact ratio.
  std::uint64_t accuracy_permille() const noexcept;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Classifies every sample through classify_batch and tallies against the
/// labels. Throws Error(InvalidArgument) on an empty sample list and
/// Error(Evaluation) when no sample decodes.
EvalReport evaluate(const std::vector<LabeledSample>& samples, const ColorRangeRule& rule,
                    std::uint64_t min_count = 1, unsigned workers = 1);

/// Adds one prediction to the tallies.
void tally(EvalReport& report, Verdict label, Verdict predicted) noexcept;

/// "48%" or "48.3%".
std::string format_accuracy(const EvalReport& report);

/// Comparison table, one row per report:
/// Classification | bleeding predictions | non-bleeding predictions |
/// total correct | accuracy. Throws Error(InvalidArgument) when empty.
std::string render_table(const std::vector<EvalReport>& reports);

/// Structured document carrying every EvalReport field.
std::string reports_to_json(const std::vector<EvalReport>& reports);

/// Header plus one CSV row per report, every field.
std::string reports_to_csv(const std::vector<EvalReport>& reports);

}  // namespace bleedscan
