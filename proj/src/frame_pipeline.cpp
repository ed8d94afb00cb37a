#include "bleedscan/frame_pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "bleedscan/error.hpp"
#include "json.hpp"

namespace bleedscan {

Frame::Frame(std::size_t width, std::size_t height, std::vector<Rgb8> pixels, std::string source)
    : width_(width), height_(height), pixels_(std::move(pixels)), source_(std::move(source)) {
  if (width_ < 1 || height_ < 1) {
    throw Error(ErrorKind::InvalidArgument, "frame dimensions must be at least 1x1");
  }
  if (pixels_.size() / width_ != height_ || pixels_.size() % width_ != 0) {
    throw Error(ErrorKind::InvalidArgument, "pixel count does not equal width * height");
  }
}

const char* verdict_token(Verdict v) noexcept {
  return v == Verdict::Bleeding ? "bleeding" : "non_bleeding";
}

std::uint64_t count_matching(std::span<const Rgb8> pixels, const ColorRangeRule& rule) noexcept {
  // Unsigned wraparound turns lo <= v <= hi into a single compare,
  // (v - lo) mod 256 <= hi - lo, which keeps the loop branch-free.
  const std::uint8_t r_lo = rule.r().lo(), r_span = rule.r().hi() - r_lo;
  const std::uint8_t g_lo = rule.g().lo(), g_span = rule.g().hi() - g_lo;
  const std::uint8_t b_lo = rule.b().lo(), b_span = rule.b().hi() - b_lo;

  const Rgb8* px = pixels.data();
  const std::size_t n = pixels.size();
  constexpr std::size_t kBlock = 1u << 16;
  std::uint64_t total = 0;
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t end = std::min(n, start + kBlock);
    std::uint32_t block = 0;
    for (std::size_t i = start; i < end; ++i) {
      const std::uint8_t dr = px[i].r - r_lo;
      const std::uint8_t dg = px[i].g - g_lo;
      const std::uint8_t db = px[i].b - b_lo;
      block += std::uint32_t(dr <= r_span) & std::uint32_t(dg <= g_span) &
               std::uint32_t(db <= b_span);
    }
    total += block;
  }
  return total;
}

std::uint64_t count_matching(const Frame& frame, const ColorRangeRule& rule) noexcept {
  return count_matching(frame.pixels(), rule);
}

FrameVerdict classify_frame(const Frame& frame, const ColorRangeRule& rule,
                            std::uint64_t min_count) {
  if (min_count < 1) throw Error(ErrorKind::InvalidArgument, "min_count must be >= 1");
  FrameVerdict v;
  v.source = frame.source();
  v.rule_id = rule.id();
  v.matching_count = count_matching(frame, rule);
  v.min_count = min_count;
  v.verdict = v.matching_count >= min_count ? Verdict::Bleeding : Verdict::NonBleeding;
  return v;
}

namespace {

std::string strip_source_prefix(const std::string& message, const std::string& source) {
  const std::string prefix = source + ": ";
  if (message.compare(0, prefix.size(), prefix) == 0) return message.substr(prefix.size());
  return message;
}

BatchEntry classify_one(const std::string& path, const ColorRangeRule& rule,
                        std::uint64_t min_count) {
  BatchEntry entry;
  entry.source = path;
  try {
    entry.verdict = classify_frame(decode_frame(path), rule, min_count);
  } catch (const std::exception& e) {
    entry.error = strip_source_prefix(e.what(), path);
    if (entry.error.empty()) entry.error = "unknown error";
  }
  return entry;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<BatchEntry> classify_batch(const std::vector<std::string>& paths,
                                       const ColorRangeRule& rule, std::uint64_t min_count,
                                       unsigned workers, const BatchSink& sink) {
  if (min_count < 1) throw Error(ErrorKind::InvalidArgument, "min_count must be >= 1");
  if (workers < 1) throw Error(ErrorKind::InvalidArgument, "workers must be >= 1");

  const std::size_t n = paths.size();
  std::vector<BatchEntry> entries(n);

  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      entries[i] = classify_one(paths[i], rule, min_count);
      if (sink) sink(i, entries[i]);
    }
    return entries;
  }

  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::condition_variable done_cv;
  std::vector<char> done(n, 0);

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      BatchEntry entry = classify_one(paths[i], rule, min_count);
      {
        std::lock_guard lock(mutex);
        entries[i] = std::move(entry);
        done[i] = 1;
      }
      done_cv.notify_all();
    }
  };

  {
    std::vector<std::jthread> pool;
    const std::size_t threads = std::min<std::size_t>(workers, n);
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);

    if (sink) {
      for (std::size_t i = 0; i < n; ++i) {
        std::unique_lock lock(mutex);
        done_cv.wait(lock, [&] { return done[i] != 0; });
        lock.unlock();
        // entries[i] is never written again once done[i] is set.
        sink(i, entries[i]);
      }
    }
  }
  return entries;
}

std::string csv_header() { return "source,rule_id,matching_count,min_count,verdict"; }

std::string csv_record(const BatchEntry& entry, const std::string& rule_id) {
  std::string line = csv_field(entry.source) + "," + csv_field(rule_id) + ",";
  if (entry.verdict) {
    line += std::to_string(entry.verdict->matching_count) + "," +
            std::to_string(entry.verdict->min_count) + "," + verdict_token(entry.verdict->verdict);
  } else {
    std::string quoted = "\"error:";
    for (char c : entry.error) {
      if (c == '"') quoted += '"';
      quoted += (c == '\n' || c == '\r') ? ' ' : c;
    }
    line += ",," + quoted + "\"";
  }
  return line;
}

std::string json_record(const BatchEntry& entry, const std::string& rule_id) {
  nlohmann::ordered_json j;
  j["source"] = entry.source;
  j["rule_id"] = rule_id;
  if (entry.verdict) {
    j["matching_count"] = entry.verdict->matching_count;
    j["min_count"] = entry.verdict->min_count;
    j["verdict"] = verdict_token(entry.verdict->verdict);
  } else {
    j["error"] = entry.error;
  }
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace bleedscan
