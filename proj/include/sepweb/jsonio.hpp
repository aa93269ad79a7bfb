#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sepweb/space.hpp"

namespace sepweb {

// Minimal ordered JSON writer with fixed float formatting (17 significant
// digits) so that seeded runs are byte-identical.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);
  JsonWriter& value(double v);
  JsonWriter& value(int v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v) { return value(std::string(v)); }
  JsonWriter& value(const Vec& v);
  JsonWriter& value(const Mat& m);  // row-major nested arrays

  // convenience: key + value
  template <typename T>
  JsonWriter& kv(const std::string& k, const T& v) {
    key(k);
    return value(v);
  }

  std::string str() const { return out_; }
  static std::string format_double(double v);

 private:
  void comma();
  std::string out_;
  std::vector<bool> first_;  // per nesting level
  bool pending_key_ = false;
};

}  // namespace sepweb
