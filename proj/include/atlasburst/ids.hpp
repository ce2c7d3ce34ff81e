#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace atlasburst {

inline constexpr int kMinStage = 1;
inline constexpr int kMaxStage = 26;
inline constexpr int kStageCount = kMaxStage - kMinStage + 1;

enum class IdNamespace : std::uint8_t { staged, abstract };

// "EMAP:<n>" (one structure at one stage) or "EMAPA:<n>" (the abstract structure).
struct StructureId {
  IdNamespace ns = IdNamespace::abstract;
  std::uint32_t number = 0;

  static StructureId abstract(std::uint32_t n) { return {IdNamespace::abstract, n}; }
  static StructureId staged(std::uint32_t n) { return {IdNamespace::staged, n}; }

  // Throws InvalidArgument on anything but the exact textual forms.
  static StructureId parse(std::string_view text);

  std::string str() const;
  bool is_abstract() const { return ns == IdNamespace::abstract; }

  friend auto operator<=>(const StructureId&, const StructureId&) = default;
};

// Theiler stage, always within [1, 26].
class Stage {
 public:
  explicit Stage(int value);

  // Accepts decimal text only ("12"); rejects signs, blanks and trailing junk.
  static Stage parse(std::string_view text);

  int value() const noexcept { return value_; }

  friend auto operator<=>(const Stage&, const Stage&) = default;

 private:
  int value_;
};

// Set of stages stored as a bitmask.
class StageSet {
 public:
  StageSet() = default;

  static StageSet all();
  static StageSet range(int first, int last);

  void insert(Stage s) { bits_ |= bit(s.value()); }
  bool contains(Stage s) const { return (bits_ & bit(s.value())) != 0; }
  bool empty() const { return bits_ == 0; }
  int size() const;
  bool is_subset_of(const StageSet& other) const { return (bits_ & ~other.bits_) == 0; }
  std::uint32_t bits() const { return bits_; }

  template <class F>
  void for_each(F&& f) const {
    for (int s = kMinStage; s <= kMaxStage; ++s)
      if (bits_ & bit(s)) f(Stage(s));
  }

  friend bool operator==(const StageSet&, const StageSet&) = default;

 private:
  static constexpr std::uint32_t bit(int s) { return std::uint32_t{1} << s; }
  std::uint32_t bits_ = 0;
};

enum class AnatomyMode : std::uint8_t { staged, abstract };

std::string_view to_string(AnatomyMode mode);
AnatomyMode parse_anatomy_mode(std::string_view text);

}  // namespace atlasburst

template <>
struct std::hash<atlasburst::StructureId> {
  std::size_t operator()(const atlasburst::StructureId& id) const noexcept {
    return std::hash<std::uint64_t>{}(
        (static_cast<std::uint64_t>(id.ns) << 32) | id.number);
  }
};
