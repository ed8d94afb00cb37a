#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bleedscan/pixel_model.hpp"

namespace bleedscan {

/// Decoded raster, row-major, top-left pixel first.
class Frame {
 public:
  /// Throws Error(InvalidArgument) unless width, height >= 1 and
  /// pixels.size() == width * height.
  Frame(std::size_t width, std::size_t height, std::vector<Rgb8> pixels,
        std::string source = {});

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  std::span<const Rgb8> pixels() const noexcept { return pixels_; }
  Rgb8 at(std::size_t x, std::size_t y) const { return pixels_.at(y * width_ + x); }
  const std::string& source() const noexcept { return source_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<Rgb8> pixels_;
  std::string source_;
};

enum class Verdict { NonBleeding, Bleeding };

/// "bleeding" / "non_bleeding".
const char* verdict_token(Verdict v) noexcept;

struct FrameVerdict {
  std::string source;
  std::string rule_id;
  std::uint64_t matching_count = 0;
  std::uint64_t min_count = 1;
  Verdict verdict = Verdict::NonBleeding;

  friend bool operator==(const FrameVerdict&, const FrameVerdict&) = default;
};

/// Reads PNG, JPEG, BMP or binary PPM/PGM (format sniffed from content, not
/// the file extension). Alpha is dropped and grayscale is replicated into all
/// three channels. Anything other than 8 bits per channel is rejected with
/// Error(BitDepth); thresholds are only defined on 8-bit levels.
Frame decode_frame(const std::string& path);

/// Writes a binary P6 PPM with maxval 255.
void write_ppm(const Frame& frame, const std::string& path);

/// Number of pixels in `frame` matching `rule`.
std::uint64_t count_matching(const Frame& frame, const ColorRangeRule& rule) noexcept;
std::uint64_t count_matching(std::span<const Rgb8> pixels, const ColorRangeRule& rule) noexcept;

/// Bleeding iff count_matching >= min_count. min_count = 1 is the plain
/// "any matching pixel" rule. Throws Error(InvalidArgument) if min_count < 1.
FrameVerdict classify_frame(const Frame& frame, const ColorRangeRule& rule,
                            std::uint64_t min_count = 1);

/// One batch slot: a verdict, or the per-file error that prevented one.
struct BatchEntry {
  std::string source;
  std::optional<FrameVerdict> verdict;
  std::string error;

  bool ok() const noexcept { return verdict.has_value(); }
  friend bool operator==(const BatchEntry&, const BatchEntry&) = default;
};

/// Called once per entry, strictly in input order, on the calling thread.
using BatchSink = std::function<void(std::size_t index, const BatchEntry& entry)>;

/// Decodes and classifies every path using up to `workers` threads. The
/// result has one entry per path, in input order, and does not depend on
/// `workers`. Per-file failures are carried in the entries and never abort
/// the batch. Throws Error(InvalidArgument) for min_count < 1 or workers < 1.
std::vector<BatchEntry> classify_batch(const std::vector<std::string>& paths,
                                       const ColorRangeRule& rule, std::uint64_t min_count,
                                       unsigned workers, const BatchSink& sink = {});

// Per-frame record output.
std::string csv_header();
std::string csv_record(const BatchEntry& entry, const std::string& rule_id);
std::string json_record(const BatchEntry& entry, const std::string& rule_id);

}  // namespace bleedscan
