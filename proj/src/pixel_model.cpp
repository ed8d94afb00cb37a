#include "bleedscan/pixel_model.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bleedscan/error.hpp"
#include "json.hpp"

namespace bleedscan {

namespace {

using nlohmann::json;

[[noreturn]] void parse_error(const std::string& msg) {
  throw Error(ErrorKind::Parse, msg);
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto name : allowed) known = known || it.key() == name;
    if (!known) {
      parse_error(where.empty() ? "unknown field: " + it.key()
                                : where + ": unknown field: " + it.key());
    }
  }
}

int channel_value(const json& bound, const std::string& channel, const char* key) {
  const std::string field = channel + "." + key;
  auto it = bound.find(key);
  if (it == bound.end()) parse_error("missing field: " + field);
  if (!it->is_number_integer()) parse_error(field + ": expected integer");
  if (it->is_number_unsigned() && it->get<std::uint64_t>() > 255) {
    parse_error(field + ": value " + std::to_string(it->get<std::uint64_t>()) + " outside [0,255]");
  }
  const auto v = it->get<std::int64_t>();
  if (v < 0 || v > 255) {
    parse_error(field + ": value " + std::to_string(v) + " outside [0,255]");
  }
  return static_cast<int>(v);
}

ChannelBound channel_bound(const json& doc, const std::string& channel) {
  auto it = doc.find(channel);
  if (it == doc.end()) parse_error("missing field: " + channel);
  if (!it->is_object()) parse_error(channel + ": expected object");
  reject_unknown(*it, {"lo", "hi"}, channel);
  const int lo = channel_value(*it, channel, "lo");
  const int hi = channel_value(*it, channel, "hi");
  if (lo > hi) parse_error(channel + ": lo > hi");
  return ChannelBound(lo, hi);
}

nlohmann::ordered_json bound_json(const ChannelBound& c) {
  nlohmann::ordered_json j;
  j["lo"] = int(c.lo());
  j["hi"] = int(c.hi());
  return j;
}

}  // namespace

ChannelBound::ChannelBound(int lo, int hi) {
  if (lo < 0 || hi > 255 || lo > hi) {
    throw Error(ErrorKind::InvalidArgument,
                "channel bound [" + std::to_string(lo) + "," + std::to_string(hi) +
                    "] violates 0 <= lo <= hi <= 255");
  }
  lo_ = static_cast<std::uint8_t>(lo);
  hi_ = static_cast<std::uint8_t>(hi);
}

ColorRangeRule::ColorRangeRule(std::string id, ChannelBound r, ChannelBound g,
                               ChannelBound b)
    : id_(std::move(id)), r_(r), g_(g), b_(b) {
  if (id_.empty()) throw Error(ErrorKind::InvalidArgument, "rule id must be non-empty");
}

ColorRangeRule preset_purity() {
  return ColorRangeRule(std::string(kPurityRedId), ChannelBound(255, 255),
                        ChannelBound(0, 0), ChannelBound(0, 0));
}

ColorRangeRule preset_range_ratio() {
  // R >= 75 && R < 128 && G >= 14 && G <= 25 && B >= 0 && B <= 15
  return ColorRangeRule(std::string(kRangeRatioId), ChannelBound(75, 127),
                        ChannelBound(14, 25), ChannelBound(0, 15));
}

std::uint64_t rule_volume(const ColorRangeRule& rule) noexcept {
  return std::uint64_t(rule.r().width()) * std::uint64_t(rule.g().width()) *
         std::uint64_t(rule.b().width());
}

ColorRangeRule parse_rule(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_error(std::string("malformed rule document: ") + e.what());
  }
  if (!doc.is_object()) parse_error("malformed rule document: expected object");
  reject_unknown(doc, {"id", "r", "g", "b"}, "");

  auto id = doc.find("id");
  if (id == doc.end()) parse_error("missing field: id");
  if (!id->is_string()) parse_error("id: expected string");
  auto id_str = id->get<std::string>();
  if (id_str.empty()) parse_error("id: must be non-empty");

  auto r = channel_bound(doc, "r");
  auto g = channel_bound(doc, "g");
  auto b = channel_bound(doc, "b");
  return ColorRangeRule(std::move(id_str), r, g, b);
}

std::string serialize_rule(const ColorRangeRule& rule) {
  nlohmann::ordered_json doc;
  doc["id"] = rule.id();
  doc["r"] = bound_json(rule.r());
  doc["g"] = bound_json(rule.g());
  doc["b"] = bound_json(rule.b());
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

ColorRangeRule load_rule_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read rule document: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_rule(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

ColorRangeRule resolve_rule(const std::string& source) {
  if (source == kPurityRedId) return preset_purity();
  if (source == kRangeRatioId) return preset_range_ratio();
  if (!std::filesystem::exists(source)) {
    throw Error(ErrorKind::Io, "unknown preset or missing rule document: " + source);
  }
  return load_rule_file(source);
}

void check_unique_ids(const std::vector<ColorRangeRule>& rules) {
  std::set<std::string> seen;
  for (const auto& rule : rules) {
    if (!seen.insert(rule.id()).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate rule id: " + rule.id());
    }
  }
}

}  // namespace bleedscan
