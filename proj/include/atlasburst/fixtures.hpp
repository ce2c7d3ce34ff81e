#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace atlasburst {

struct FixtureSpec {
  int structures = 2000;
  int genes = 100;
  int stages = 26;        // structures exist within TS1..TS<stages>
  double density = 3.0;   // mean annotations per gene
  std::uint64_t seed = 42;
};

struct FixtureFiles {
  std::string anatomy;      // anatomy JSON
  std::string annotations;  // newline-delimited annotation records
};

inline constexpr const char* kAnatomyFileName = "anatomy.json";
inline constexpr const char* kAnnotationsFileName = "annotations.jsonl";
inline constexpr const char* kPaletteFileName = "palette.json";

// Deterministic for a given spec. The stage-1 view always has exactly five
// structures (the root plus four). Throws InvalidArgument for impossible specs.
FixtureFiles generate_fixtures(const FixtureSpec& spec);

// Writes anatomy.json and annotations.jsonl into `dir` (created if missing).
// Throws Error("io", ...) when the directory or files cannot be written.
void write_fixtures(const FixtureSpec& spec, const std::filesystem::path& dir);

}  // namespace atlasburst
