#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "bleedscan/frame_pipeline.hpp"

namespace bleedscan {

/// Parameters of one synthetic frame.
struct GenSpec {
  std::uint64_t seed = 0;
  std::size_t width = 64;
  std::size_t height = 64;
  /// Minimum blob area as a fraction of the frame area, in (0, 0.25].
  double blob_fraction = 0.02;
};

/// Throws Error(InvalidArgument) unless width, height >= 16 and
/// 0 < blob_fraction <= 0.25.
void validate(const GenSpec& spec);

// Palette bounds, inclusive.
inline constexpr Rgb8 kMucosaLo{140, 60, 90};
inline constexpr Rgb8 kMucosaHi{230, 160, 150};
inline constexpr std::uint8_t kBorderMax = 10;

/// Integer-only sampling on top of std::mt19937_64, whose output sequence is
/// fixed by the standard. std::uniform_int_distribution is avoided because
/// its algorithm is implementation-defined.
class SeededSampler {
 public:
  explicit SeededSampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, bound), bound >= 1, by rejection sampling.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform integer in [lo, hi].
  std::uint8_t in_range(std::uint8_t lo, std::uint8_t hi) {
    return static_cast<std::uint8_t>(lo + below(std::uint64_t(hi) - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a corpus seed with a frame index into an independent frame seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Mucosa-colored disk inside a near-black circular border. Matches neither
/// preset anywhere.
Frame gen_mucosa_frame(const GenSpec& spec);

/// Mucosa frame plus one filled ellipse, at least ceil(blob_fraction * area)
/// pixels, entirely inside the disk, every pixel drawn from the range-ratio
/// box. Throws Error(InvalidArgument) when the blob cannot fit.
Frame gen_bleeding_frame(const GenSpec& spec);

/// Interior disk radius shared by the generators (border is outside it).
std::size_t interior_radius(std::size_t width, std::size_t height) noexcept;

/// Writes round(n * bleeding_fraction) bleeding frames and the rest
/// non-bleeding as frame_<index:05>.ppm under out_dir, plus manifest.csv.
/// Labels are shuffled deterministically from `seed`; `frame` supplies the
/// size and blob fraction (its seed is ignored). Returns the manifest path.
std::filesystem::path gen_corpus(std::uint64_t seed, std::size_t n, double bleeding_fraction,
                                 const std::filesystem::path& out_dir,
                                 const GenSpec& frame = GenSpec{0, 128, 128, 0.02});

}  // namespace bleedscan
