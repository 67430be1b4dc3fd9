#include "sgca/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sgca/error.hpp"

namespace sgca::jsonio {

std::string format_double(double v) {
  if (!std::isfinite(v)) {
    throw NumericError("nonfinite_value",
                       "refusing to serialize a non-finite float");
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void Writer::pre_value() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!scope_.empty()) {
    if (has_items_.back()) out_ += ',';
    has_items_.back() = true;
  }
}

Writer& Writer::begin_object() {
  pre_value();
  out_ += '{';
  scope_.push_back('{');
  has_items_.push_back(false);
  return *this;
}

Writer& Writer::end_object() {
  out_ += '}';
  scope_.pop_back();
  has_items_.pop_back();
  return *this;
}

Writer& Writer::begin_array() {
  pre_value();
  out_ += '[';
  scope_.push_back('[');
  has_items_.push_back(false);
  return *this;
}

Writer& Writer::end_array() {
  out_ += ']';
  scope_.pop_back();
  has_items_.pop_back();
  return *this;
}

Writer& Writer::key(std::string_view k) {
  if (has_items_.back()) out_ += ',';
  has_items_.back() = true;
  out_ += '"';
  out_ += escape(k);
  out_ += "\":";
  pending_key_ = true;
  return *this;
}

Writer& Writer::value(double v) {
  pre_value();
  out_ += format_double(v);
  return *this;
}

Writer& Writer::value(std::int64_t v) {
  pre_value();
  out_ += std::to_string(v);
  return *this;
}

Writer& Writer::value(std::uint64_t v) {
  pre_value();
  out_ += std::to_string(v);
  return *this;
}

Writer& Writer::value(std::string_view v) {
  pre_value();
  out_ += '"';
  out_ += escape(v);
  out_ += '"';
  return *this;
}

Writer& Writer::value(bool v) {
  pre_value();
  out_ += v ? "true" : "false";
  return *this;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("file_not_found",
                          "cannot open file: " + path.string());
  }
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ValidationError("io_error", "cannot write file: " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw ValidationError("io_error", "short write to: " + path.string());
  }
}

}  // namespace sgca::jsonio
