#include "bleedscan/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "bleedscan/corpus_eval.hpp"
#include "bleedscan/error.hpp"

namespace bleedscan {

namespace {

// Signed arithmetic on pixel coordinates.
using Coord = std::int64_t;

// Semi-axes of an axis-aligned ellipse, in pixels.
struct Ellipse {
  Coord half_w;
  Coord half_h;

  Coord reach() const { return std::max(half_w, half_h); }

  bool contains(Coord dx, Coord dy) const {
    const Coord aa = half_w * half_w, bb = half_h * half_h;
    return dx * dx * bb + dy * dy * aa <= aa * bb;
  }

  std::uint64_t area() const {
    std::uint64_t count = 0;
    for (Coord dy = -half_h; dy <= half_h; ++dy) {
      for (Coord dx = -half_w; dx <= half_w; ++dx) count += contains(dx, dy);
    }
    return count;
  }
};

// Interior test in doubled coordinates so the frame center stays integral.
bool inside_disk(Coord x, Coord y, const GenSpec& spec, Coord radius) {
  const Coord dx = 2 * x - Coord(spec.width - 1);
  const Coord dy = 2 * y - Coord(spec.height - 1);
  return dx * dx + dy * dy <= 4 * radius * radius;
}

std::vector<Rgb8> mucosa_pixels(const GenSpec& spec, SeededSampler& rng) {
  const Coord radius = Coord(interior_radius(spec.width, spec.height));
  std::vector<Rgb8> pixels(spec.width * spec.height);
  for (std::size_t y = 0; y < spec.height; ++y) {
    for (std::size_t x = 0; x < spec.width; ++x) {
      Rgb8& p = pixels[y * spec.width + x];
      if (inside_disk(Coord(x), Coord(y), spec, radius)) {
        p.r = rng.in_range(kMucosaLo.r, kMucosaHi.r);
        p.g = rng.in_range(kMucosaLo.g, kMucosaHi.g);
        p.b = rng.in_range(kMucosaLo.b, kMucosaHi.b);
      } else {
        p.r = rng.in_range(0, kBorderMax);
        p.g = rng.in_range(0, kBorderMax);
        p.b = rng.in_range(0, kBorderMax);
      }
    }
  }
  return pixels;
}

// Smallest ellipse with the given elongation (a = b + b * stretch / 8) whose
// lattice area reaches `target`.
Ellipse grow_ellipse(std::uint64_t target, Coord stretch, Coord limit) {
  for (Coord b = 1;; ++b) {
    Ellipse e{b + (b * stretch) / 8, b};
    if (e.area() >= target || e.reach() > limit) return e;
  }
}

// Every pixel within `reach` of center c is inside the disk when
// |2c - C| <= 2 * (radius - reach).
std::optional<std::pair<Coord, Coord>> place(const Ellipse& e, const GenSpec& spec,
                                             Coord radius, SeededSampler& rng) {
  const Coord slack = radius - e.reach();
  if (slack < 0) return std::nullopt;
  auto fits = [&](Coord x, Coord y) {
    const Coord dx = 2 * x - Coord(spec.width - 1);
    const Coord dy = 2 * y - Coord(spec.height - 1);
    return dx * dx + dy * dy <= 4 * slack * slack;
  };
  std::uint64_t candidates = 0;
  for (Coord y = 0; y < Coord(spec.height); ++y) {
    for (Coord x = 0; x < Coord(spec.width); ++x) candidates += fits(x, y);
  }
  if (candidates == 0) return std::nullopt;
  std::uint64_t pick = rng.below(candidates);
  for (Coord y = 0; y < Coord(spec.height); ++y) {
    for (Coord x = 0; x < Coord(spec.width); ++x) {
      if (fits(x, y) && pick-- == 0) return std::pair{x, y};
    }
  }
  return std::nullopt;
}

}  // namespace

void validate(const GenSpec& spec) {
  if (spec.width < 16 || spec.height < 16) {
    throw Error(ErrorKind::InvalidArgument, "GenSpec: width and height must be >= 16");
  }
  if (!(spec.blob_fraction > 0.0 && spec.blob_fraction <= 0.25)) {
    throw Error(ErrorKind::InvalidArgument, "GenSpec: blob_fraction must be in (0, 0.25]");
  }
  if (spec.width > (1u << 14) || spec.height > (1u << 14)) {
    throw Error(ErrorKind::InvalidArgument, "GenSpec: width and height must be <= 16384");
  }
}

std::uint64_t SeededSampler::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % bound;
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  // splitmix64 finalizer
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::size_t interior_radius(std::size_t width, std::size_t height) noexcept {
  const std::size_t side = std::min(width, height);
  return side / 2 - std::max<std::size_t>(1, side / 16);
}

Frame gen_mucosa_frame(const GenSpec& spec) {
  validate(spec);
  SeededSampler rng(spec.seed);
  return Frame(spec.width, spec.height, mucosa_pixels(spec, rng),
               "synth:mucosa:" + std::to_string(spec.seed));
}

Frame gen_bleeding_frame(const GenSpec& spec) {
  validate(spec);
  SeededSampler rng(spec.seed);
  std::vector<Rgb8> pixels = mucosa_pixels(spec, rng);

  const Coord radius = Coord(interior_radius(spec.width, spec.height));
  const auto target = static_cast<std::uint64_t>(
      std::ceil(spec.blob_fraction * double(spec.width) * double(spec.height)));

  const Coord stretch = Coord(rng.below(9));
  const bool tall = rng.below(2) == 1;
  Ellipse blob = grow_ellipse(target, stretch, radius);
  auto center = blob.area() >= target ? place(blob, spec, radius, rng) : std::nullopt;
  if (!center) {
    // A circle is the most compact shape for the disk.
    blob = grow_ellipse(target, 0, radius);
    if (blob.area() >= target) center = place(blob, spec, radius, rng);
  }
  if (!center) {
    throw Error(ErrorKind::InvalidArgument,
                "blob cannot fit: blob_fraction too large for the frame interior");
  }
  if (tall) std::swap(blob.half_w, blob.half_h);

  const ColorRangeRule box = preset_range_ratio();
  const auto [cx, cy] = *center;
  for (Coord y = cy - blob.half_h; y <= cy + blob.half_h; ++y) {
    for (Coord x = cx - blob.half_w; x <= cx + blob.half_w; ++x) {
      if (!blob.contains(x - cx, y - cy)) continue;
      Rgb8& p = pixels[std::size_t(y) * spec.width + std::size_t(x)];
      p.r = rng.in_range(box.r().lo(), box.r().hi());
      p.g = rng.in_range(box.g().lo(), box.g().hi());
      p.b = rng.in_range(box.b().lo(), box.b().hi());
    }
  }
  return Frame(spec.width, spec.height, std::move(pixels),
               "synth:bleeding:" + std::to_string(spec.seed));
}

std::filesystem::path gen_corpus(std::uint64_t seed, std::size_t n, double bleeding_fraction,
                                 const std::filesystem::path& out_dir, const GenSpec& frame) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "gen_corpus: n must be >= 2");
  if (!(bleeding_fraction >= 0.0 && bleeding_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "gen_corpus: bleeding_fraction must be in [0, 1]");
  }
  validate(frame);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory: " + out_dir.string());
  }

  const auto n_bleeding =
      static_cast<std::size_t>(std::llround(double(n) * bleeding_fraction));
  std::vector<Verdict> labels(n, Verdict::NonBleeding);
  std::fill_n(labels.begin(), n_bleeding, Verdict::Bleeding);
  SeededSampler shuffle(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(labels[i], labels[shuffle.below(i + 1)]);
  }

  std::vector<LabeledSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.ppm", i);
    GenSpec spec = frame;
    spec.seed = derive_seed(seed, i);
    const Frame f = labels[i] == Verdict::Bleeding ? gen_bleeding_frame(spec)
                                                   : gen_mucosa_frame(spec);
    write_ppm(f, (out_dir / name).string());
    samples.push_back({name, labels[i]});
  }

  const auto manifest = out_dir / "manifest.csv";
  const std::string comment = "synthetic corpus seed=" + std::to_string(seed) +
                              " n=" + std::to_string(n) +
                              " bleeding=" + std::to_string(n_bleeding) +
                              " size=" + std::to_string(frame.width) + "x" +
                              std::to_string(frame.height);
  std::FILE* out = std::fopen(manifest.string().c_str(), "wb");
  if (!out) throw Error(ErrorKind::Io, "cannot write manifest: " + manifest.string());
  const std::string text = format_manifest(samples, comment);
  const bool ok = std::fwrite(text.data(), 1, text.size(), out) == text.size();
  if (std::fclose(out) != 0 || !ok) {
    throw Error(ErrorKind::Io, "cannot write manifest: " + manifest.string());
  }
  return manifest;
}

}  // namespace bleedscan
