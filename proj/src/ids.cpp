#include "atlasburst/ids.hpp"

#include <bit>
#include <charconv>
#include <limits>

#include "atlasburst/errors.hpp"

namespace atlasburst {

namespace {

bool parse_uint(std::string_view text, std::uint64_t max, std::uint64_t& out) {
  if (text.empty() || text.size() > 10) return false;
  for (char c : text)
    if (c < '0' || c > '9') return false;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value > max) return false;
  out = value;
  return true;
}

}  // namespace

StructureId StructureId::parse(std::string_view text) {
  constexpr std::string_view kAbstract = "EMAPA:";
  constexpr std::string_view kStaged = "EMAP:";
  StructureId id;
  std::string_view digits;
  if (text.starts_with(kAbstract)) {
    id.ns = IdNamespace::abstract;
    digits = text.substr(kAbstract.size());
  } else if (text.starts_with(kStaged)) {
    id.ns = IdNamespace::staged;
    digits = text.substr(kStaged.size());
  } else {
    throw InvalidArgument("bad_id", "not a structure id: '" + std::string(text) + "'");
  }
  std::uint64_t n = 0;
  if (!parse_uint(digits, std::numeric_limits<std::uint32_t>::max(), n))
    throw InvalidArgument("bad_id", "not a structure id: '" + std::string(text) + "'");
  id.number = static_cast<std::uint32_t>(n);
  return id;
}

std::string StructureId::str() const {
  return (ns == IdNamespace::abstract ? "EMAPA:" : "EMAP:") + std::to_string(number);
}

Stage::Stage(int value) : value_(value) {
  if (value < kMinStage || value > kMaxStage)
    throw InvalidArgument("bad_stage", "stage " + std::to_string(value) +
                                           " outside [1, 26]");
}

Stage Stage::parse(std::string_view text) {
  std::uint64_t n = 0;
  if (!parse_uint(text, 1000, n))
    throw InvalidArgument("bad_stage", "not a stage number: '" + std::string(text) + "'");
  return Stage(static_cast<int>(n));
}

StageSet StageSet::all() { return range(kMinStage, kMaxStage); }

StageSet StageSet::range(int first, int last) {
  StageSet set;
  for (int s = first; s <= last; ++s) set.insert(Stage(s));
  return set;
}

int StageSet::size() const { return std::popcount(bits_); }

std::string_view to_string(AnatomyMode mode) {
  return mode == AnatomyMode::staged ? "staged" : "abstract";
}

AnatomyMode parse_anatomy_mode(std::string_view text) {
  if (text == "staged") return AnatomyMode::staged;
  if (text == "abstract") return AnatomyMode::abstract;
  throw InvalidArgument("bad_mode", "mode must be 'staged' or 'abstract', got '" +
                                        std::string(text) + "'");
}

}  // namespace atlasburst
