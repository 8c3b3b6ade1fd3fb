#include "spinlab/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace spinlab {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (std::uint8_t(c) < 0x20) {
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

void JsonWriter::pre_value() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!first_.empty()) {
    if (!first_.back()) out_ += ',';
    first_.back() = false;
  }
}

void JsonWriter::begin_object() {
  pre_value();
  out_ += '{';
  first_.push_back(true);
}

void JsonWriter::end_object() {
  out_ += '}';
  first_.pop_back();
}

void JsonWriter::begin_array() {
  pre_value();
  out_ += '[';
  first_.push_back(true);
}

void JsonWriter::end_array() {
  out_ += ']';
  first_.pop_back();
}

void JsonWriter::key(const std::string& k) {
  if (!first_.empty()) {
    if (!first_.back()) out_ += ',';
    first_.back() = false;
  }
  out_ += '"' + json_escape(k) + "\":";
  after_key_ = true;
}

void JsonWriter::value(const std::string& v) {
  pre_value();
  out_ += '"' + json_escape(v) + '"';
}

void JsonWriter::value(double v) {
  pre_value();
  if (std::isnan(v)) out_ += "null";
  else if (std::isinf(v)) out_ += v > 0 ? "1e999" : "-1e999";
  else out_ += format_g17(v);
}

void JsonWriter::value(Index v) {
  pre_value();
  out_ += std::to_string(v);
}

void JsonWriter::value(bool v) {
  pre_value();
  out_ += v ? "true" : "false";
}

void JsonWriter::null() {
  pre_value();
  out_ += "null";
}

int Report::passed() const {
  int k = 0;
  for (auto& c : checks) k += c.pass ? 1 : 0;
  return k;
}

int Report::failed_hard() const {
  int k = 0;
  for (auto& c : checks) k += (!c.pass && !c.sampled) ? 1 : 0;
  return k;
}

int Report::failed_sampled() const {
  int k = 0;
  for (auto& c : checks) k += (!c.pass && c.sampled) ? 1 : 0;
  return k;
}

std::string Report::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("tool");
  w.value("spinlab");
  w.key("seed");
  w.value(Index(seed));
  w.key("config");
  w.value(config_echo);
  w.key("checks");
  w.begin_array();
  for (auto& c : checks) {
    w.begin_object();
    w.key("suite");
    w.value(c.suite);
    w.key("name");
    w.value(c.name);
    w.key("inputs");
    w.begin_object();
    for (auto& [k, v] : c.inputs) {
      w.key(k);
      w.value(v);
    }
    w.end_object();
    w.key("values");
    w.begin_object();
    for (auto& [k, v] : c.values) {
      w.key(k);
      w.value(v);
    }
    w.end_object();
    w.key("bound");
    if (std::isnan(c.bound)) w.null(); else w.value(c.bound);
    w.key("margin");
    if (std::isnan(c.margin)) w.null(); else w.value(c.margin);
    w.key("tolerance");
    w.value(c.tolerance);
    w.key("pass");
    w.value(c.pass);
    w.key("sampled");
    w.value(c.sampled);
    w.end_object();
  }
  w.end_array();
  w.key("summary");
  w.begin_object();
  w.key("total");
  w.value(Index(checks.size()));
  w.key("passed");
  w.value(Index(passed()));
  w.key("failed");
  w.value(Index(failed_hard()));
  w.key("failed_sampled");
  w.value(Index(failed_sampled()));
  w.key("all_passed");
  w.value(failed_hard() == 0);
  w.end_object();
  w.end_object();
  return w.str() + "\n";
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os << "suite,check,pass,sampled,margin,bound,tolerance,runtime_ms,values\n";
  for (auto& c : checks) {
    os << c.suite << ',' << c.name << ',' << (c.pass ? 1 : 0) << ',' << (c.sampled ? 1 : 0) << ','
       << (std::isnan(c.margin) ? "" : format_g17(c.margin)) << ','
       << (std::isnan(c.bound) ? "" : format_g17(c.bound)) << ',' << format_g17(c.tolerance) << ','
       << format_g17(c.runtime_ms) << ',';
    bool first = true;
    for (auto& [k, v] : c.values) {
      if (!first) os << ';';
      first = false;
      os << k << '=' << format_g17(v);
    }
    os << '\n';
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace spinlab
