#pragma once

#include <map>
#include <string>
#include <vector>

#include "spinlab/common.hpp"

namespace spinlab {

// Deterministic JSON emitter: insertion order preserved, doubles printed with
// 17 significant digits so serialized values round-trip exactly.
class JsonWriter {
 public:
  std::string str() const { return out_; }
  void begin_object();
  void end_object();
  void begin_array();
  void end_array();
  void key(const std::string& k);
  void value(const std::string& v);
  void value(const char* v) { value(std::string(v)); }
  void value(double v);
  void value(Index v);
  void value(int v) { value(Index(v)); }
  void value(bool v);
  void null();

 private:
  void pre_value();
  std::string out_;
  std::vector<bool> first_;
  bool after_key_ = false;
};

std::string json_escape(const std::string& s);

struct CheckRecord {
  std::string suite;
  std::string name;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, double>> values;
  double bound = kNaN;
  double margin = kNaN;
  double tolerance = 0;
  bool pass = false;
  bool sampled = false;
  double runtime_ms = 0;  // CSV only, never serialized to JSON

  void set(const std::string& k, double v) { values.emplace_back(k, v); }
  void input(const std::string& k, const std::string& v) { inputs.emplace_back(k, v); }
};

struct Report {
  std::uint64_t seed = 0;
  std::string config_echo;  // canonical description of the run inputs
  std::vector<CheckRecord> checks;

  int passed() const;
  int failed_hard() const;     // non-sampled failures
  int failed_sampled() const;
  bool all_hard_passed() const { return failed_hard() == 0; }

  std::string to_json() const;
  std::string to_csv() const;
};

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace spinlab
