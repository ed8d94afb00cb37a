#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bleedscan {

/// One pixel, channel order fixed as red, green, blue.
struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};
static_assert(sizeof(Rgb8) == 3, "Rgb8 must be tightly packed");

/// Inclusive interval [lo, hi] on one 8-bit channel.
class ChannelBound {
 public:
  /// Throws Error(InvalidArgument) unless 0 <= lo <= hi <= 255.
  ChannelBound(int lo, int hi);

  std::uint8_t lo() const noexcept { return lo_; }
  std::uint8_t hi() const noexcept { return hi_; }
  bool contains(std::uint8_t v) const noexcept { return v >= lo_ && v <= hi_; }
  /// Number of channel values inside the interval (1..256).
  int width() const noexcept { return int(hi_) - int(lo_) + 1; }

  friend bool operator==(const ChannelBound&, const ChannelBound&) = default;

 private:
  std::uint8_t lo_;
  std::uint8_t hi_;
};

/// Axis-aligned box in 24-bit RGB space. A pixel matches when every channel
/// lies inside its bound. Strict comparisons such as `R < 128` are stored in
/// their inclusive form (`R <= 127`).
class ColorRangeRule {
 public:
  ColorRangeRule(std::string id, ChannelBound r, ChannelBound g, ChannelBound b);

  const std::string& id() const noexcept { return id_; }
  const ChannelBound& r() const noexcept { return r_; }
  const ChannelBound& g() const noexcept { return g_; }
  const ChannelBound& b() const noexcept { return b_; }

  friend bool operator==(const ColorRangeRule&, const ColorRangeRule&) = default;

 private:
  std::string id_;
  ChannelBound r_;
  ChannelBound g_;
  ChannelBound b_;
};

inline bool pixel_matches(Rgb8 p, const ColorRangeRule& rule) noexcept {
  return rule.r().contains(p.r) && rule.g().contains(p.g) && rule.b().contains(p.b);
}

inline constexpr std::string_view kPurityRedId = "purity_red";
inline constexpr std::string_view kRangeRatioId = "range_ratio";

/// Exactly (255, 0, 0).
ColorRangeRule preset_purity();

/// R in [75,127], G in [14,25], B in [0,15].
ColorRangeRule preset_range_ratio();

/// Number of distinct 24-bit colors inside the rule's box.
std::uint64_t rule_volume(const ColorRangeRule& rule) noexcept;

/// Parses a rule document:
///   {"id": "...", "r": {"lo": 0, "hi": 255}, "g": {...}, "b": {...}}
/// Unknown fields are rejected. Errors name the offending field, e.g.
/// "g: lo > hi" or "missing field: b".
ColorRangeRule parse_rule(std::string_view text);

std::string serialize_rule(const ColorRangeRule& rule);

/// Reads and parses a rule document from disk.
ColorRangeRule load_rule_file(const std::string& path);

/// Resolves a preset name ("purity_red", "range_ratio") or a rule-document
/// path.
ColorRangeRule resolve_rule(const std::string& source);

/// Throws Error(InvalidArgument) if two rules share an id.
void check_unique_ids(const std::vector<ColorRangeRule>& rules);

}  // namespace bleedscan
