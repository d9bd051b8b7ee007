#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ridemp {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat `key = value` text document. Lines starting with '#' are comments.
// Array values are whitespace separated. Keys keep insertion order on output.
class KvDocument {
 public:
  static KvDocument parse(std::istream& in);
  static KvDocument parse_string(std::string_view text);
  static KvDocument load(const std::string& path);

  void write(std::ostream& out) const;
  std::string to_string() const;
  void save(const std::string& path) const;

  bool contains(std::string_view key) const;
  std::vector<std::string> keys() const { return order_; }

  void set(std::string_view key, std::string value);
  void set(std::string_view key, const char* value) { set(key, std::string(value)); }
  void set(std::string_view key, std::int64_t value);
  void set(std::string_view key, int value) { set(key, static_cast<std::int64_t>(value)); }
  void set(std::string_view key, std::uint64_t value);
  void set(std::string_view key, double value);
  void set(std::string_view key, const std::vector<double>& values);
  void set(std::string_view key, const std::vector<int>& values);

  const std::string& get_string(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;
  std::vector<int> get_ints(std::string_view key) const;

  std::string get_string_or(std::string_view key, std::string fallback) const;
  std::int64_t get_int_or(std::string_view key, std::int64_t fallback) const;
  double get_double_or(std::string_view key, double fallback) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::vector<std::string> order_;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace ridemp
