#include "sepweb/jsonio.hpp"

#include <cmath>
#include <cstdio>

namespace sepweb {

std::string JsonWriter::format_double(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void JsonWriter::comma() {
  if (!first_.empty()) {
    if (!first_.back() && !pending_key_) out_ += ",";
    if (!pending_key_) first_.back() = false;
  }
  pending_key_ = false;
}

JsonWriter& JsonWriter::begin_object() {
  comma();
  out_ += "{";
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += "}";
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  comma();
  out_ += "[";
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += "]";
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
  if (!first_.empty() && !first_.back()) out_ += ",";
  if (!first_.empty()) first_.back() = false;
  out_ += "\"" + k + "\":";
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  comma();
  out_ += format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) {
  comma();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  comma();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  comma();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
  comma();
  out_ += "\"";
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      default: out_ += c;
    }
  }
  out_ += "\"";
  return *this;
}

JsonWriter& JsonWriter::value(const Vec& v) {
  begin_array();
  for (int i = 0; i < v.size(); ++i) value(v[i]);
  return end_array();
}

JsonWriter& JsonWriter::value(const Mat& m) {
  begin_array();
  for (int i = 0; i < m.rows(); ++i) {
    begin_array();
    for (int j = 0; j < m.cols(); ++j) value(m(i, j));
    end_array();
  }
  return end_array();
}

}  // namespace sepweb
