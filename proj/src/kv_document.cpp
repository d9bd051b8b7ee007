#include "ridemp/kv_document.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ridemp {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos >= s.size()) break;
    std::size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
    out.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  T value{};
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw FormatError("cannot format double");
  return std::string(buf, ptr);
}

KvDocument KvDocument::parse(std::istream& in) {
  KvDocument doc;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(body.substr(0, eq));
    if (key.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty key");
    if (doc.contains(key)) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    doc.set(key, std::string(trim(body.substr(eq + 1))));
  }
  return doc;
}

KvDocument KvDocument::parse_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

KvDocument KvDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return parse(in);
}

void KvDocument::write(std::ostream& out) const {
  for (const auto& key : order_) out << key << " = " << values_.find(key)->second << '\n';
}

std::string KvDocument::to_string() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

void KvDocument::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  write(out);
}

bool KvDocument::contains(std::string_view key) const { return values_.find(key) != values_.end(); }

void KvDocument::set(std::string_view key, std::string value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    order_.emplace_back(key);
    values_.emplace(std::string(key), std::move(value));
  } else {
    it->second = std::move(value);
  }
}

void KvDocument::set(std::string_view key, std::int64_t value) { set(key, std::to_string(value)); }
void KvDocument::set(std::string_view key, std::uint64_t value) { set(key, std::to_string(value)); }
void KvDocument::set(std::string_view key, double value) { set(key, format_double(value)); }

void KvDocument::set(std::string_view key, const std::vector<double>& values) {
  std::string text;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text += ' ';
    text += format_double(values[i]);
  }
  set(key, std::move(text));
}

void KvDocument::set(std::string_view key, const std::vector<int>& values) {
  std::string text;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text += ' ';
    text += std::to_string(values[i]);
  }
  set(key, std::move(text));
}

const std::string& KvDocument::get_string(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw FormatError("missing key '" + std::string(key) + "'");
  return it->second;
}

std::int64_t KvDocument::get_int(std::string_view key) const {
  return parse_number<std::int64_t>(get_string(key), key);
}

std::uint64_t KvDocument::get_uint(std::string_view key) const {
  return parse_number<std::uint64_t>(get_string(key), key);
}

double KvDocument::get_double(std::string_view key) const {
  return parse_number<double>(get_string(key), key);
}

std::vector<double> KvDocument::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (auto tok : split_ws(get_string(key))) out.push_back(parse_number<double>(tok, key));
  return out;
}

std::vector<int> KvDocument::get_ints(std::string_view key) const {
  std::vector<int> out;
  for (auto tok : split_ws(get_string(key))) out.push_back(parse_number<int>(tok, key));
  return out;
}

std::string KvDocument::get_string_or(std::string_view key, std::string fallback) const {
  return contains(key) ? get_string(key) : fallback;
}

std::int64_t KvDocument::get_int_or(std::string_view key, std::int64_t fallback) const {
  return contains(key) ? get_int(key) : fallback;
}

double KvDocument::get_double_or(std::string_view key, double fallback) const {
  return contains(key) ? get_double(key) : fallback;
}

}  // namespace ridemp
