#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sgca::jsonio {

// 17 significant digits: round-trip exact for 64-bit floats and stable
// across runs, which keeps emitted artifacts byte-identical.
std::string format_double(double v);

std::string escape(std::string_view s);

// Minimal streaming JSON emitter. Keys appear in call order, so artifact
// layouts are fixed by the call sites rather than by a map ordering.
class Writer {
 public:
  Writer& begin_object();
  Writer& end_object();
  Writer& begin_array();
  Writer& end_array();
  Writer& key(std::string_view k);
  Writer& value(double v);
  Writer& value(std::int64_t v);
  Writer& value(std::uint64_t v);
  Writer& value(int v) { return value(static_cast<std::int64_t>(v)); }
  Writer& value(std::string_view v);
  Writer& value(const char* v) { return value(std::string_view(v)); }
  Writer& value(bool v);

  const std::string& str() const { return out_; }

 private:
  void pre_value();

  std::string out_;
  std::vector<char> scope_;       // '{' or '['
  std::vector<bool> has_items_;
  bool pending_key_ = false;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace sgca::jsonio
