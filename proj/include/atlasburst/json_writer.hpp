#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace atlasburst {

// Fixed-point decimal text ("0.250000000"); never emits "-0.000...".
std::string format_fixed(double value, int decimals);

// Streaming JSON writer for documents whose bytes must be reproducible:
// floating-point values are always written with a fixed number of decimals.
class JsonWriter {
 public:
  explicit JsonWriter(int decimals = 9) : decimals_(decimals) {}

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);

  JsonWriter& value(std::string_view text);
  JsonWriter& value(const char* text) { return value(std::string_view(text)); }
  JsonWriter& value(const std::string& text) { return value(std::string_view(text)); }
  JsonWriter& value(bool flag);
  JsonWriter& value(std::int64_t number);
  JsonWriter& value(int number) { return value(static_cast<std::int64_t>(number)); }
  JsonWriter& value(std::size_t number) { return value(static_cast<std::int64_t>(number)); }
  JsonWriter& value(double number);
  JsonWriter& raw(std::string_view json);  // pre-serialized value

  const std::string& str() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  void separate();

  int decimals_;
  std::string out_;
  std::vector<bool> first_;  // per open container: no element written yet
  bool after_key_ = false;
};

std::string json_quote(std::string_view text);

}  // namespace atlasburst
