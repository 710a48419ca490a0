#include "fmgls_cli/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "fmgls/error.hpp"

namespace fmgls::cli {

int Dataset::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

bool read_csv_record(std::istream& in, std::vector<std::string>& fields, int& line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  ++line;
  const int start = line;
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (;;) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw ValidationError("line " + std::to_string(start) + ": unterminated quoted field");
      fields.push_back(cur);
      return true;
    }
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          cur += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cur += static_cast<char>(c);
      }
      continue;
    }
    if (c == '"') {
      if (!cur.empty() || was_quoted)
        throw ValidationError("line " + std::to_string(line) + ": stray quote inside field");
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
      was_quoted = false;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      fields.push_back(cur);
      return true;
    } else if (c == '\n') {
      fields.push_back(cur);
      return true;
    } else {
      if (was_quoted) throw ValidationError("line " + std::to_string(line) + ": text after closing quote");
      cur += static_cast<char>(c);
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, int line, const std::string& column) {
  const std::string s = trim(raw);
  const std::string where = "line " + std::to_string(line) + ", column '" + column + "'";
  if (s.empty()) throw ValidationError(where + ": missing value");
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError(where + ": not a number: '" + s + "'");
  if (!std::isfinite(v)) throw ValidationError(where + ": non-finite value");
  return v;
}

long long parse_integer(const std::string& raw, int line) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("line " + std::to_string(line) + ": t must be an integer, got '" + s + "'");
  return v;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source) {
  auto fail = [&](const std::string& msg) { throw ValidationError(source + ": " + msg); };
  std::vector<std::string> header;
  int line = 0;
  try {
    if (!read_csv_record(in, header, line)) fail("empty file, header row required");
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    for (auto& h : header) h = trim(h);
    if (header.empty() || header[0] != "t") fail("first column must be 't'");

    // column -> (unit, is_x)
    Dataset ds;
    std::map<std::string, std::pair<int, int>> seen;  // unit -> (y column, x column)
    std::vector<std::string> order;
    for (std::size_t c = 1; c < header.size(); ++c) {
      const std::string& h = header[c];
      const bool is_y = h.rfind("y_", 0) == 0, is_x = h.rfind("x_", 0) == 0;
      if ((!is_y && !is_x) || h.size() < 3) fail("unexpected column '" + h + "', expected y_<name> or x_<name>");
      const std::string name = h.substr(2);
      auto it = seen.find(name);
      if (it == seen.end()) {
        it = seen.emplace(name, std::make_pair(-1, -1)).first;
        order.push_back(name);
      }
      int& slot = is_y ? it->second.first : it->second.second;
      if (slot >= 0) fail("duplicate column '" + h + "'");
      slot = static_cast<int>(c);
    }
    if (order.empty()) fail("no y_<name>/x_<name> columns");
    for (const auto& name : order) {
      if (seen[name].first < 0) fail("unit '" + name + "' has x_ but no y_ column");
      if (seen[name].second < 0) fail("unit '" + name + "' has y_ but no x_ column");
    }

    std::vector<std::vector<double>> cols(header.size());
    std::vector<std::string> rec;
    while (read_csv_record(in, rec, line)) {
      if (rec.size() == 1 && trim(rec[0]).empty()) {
        // a blank line is tolerated only at the end
        std::vector<std::string> more;
        int probe = line;
        while (read_csv_record(in, more, probe))
          if (!(more.size() == 1 && trim(more[0]).empty())) fail("line " + std::to_string(line) + ": blank row");
        break;
      }
      if (rec.size() != header.size())
        fail("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) + " fields, got " +
             std::to_string(rec.size()));
      const long long t = parse_integer(rec[0], line);
      if (!ds.t.empty() && t <= ds.t.back()) fail("line " + std::to_string(line) + ": t must be strictly increasing");
      ds.t.push_back(t);
      for (std::size_t c = 1; c < rec.size(); ++c) cols[c].push_back(parse_double(rec[c], line, header[c]));
    }
    const int T = static_cast<int>(ds.t.size());
    if (T < 2) fail("need at least two observations");
    const int n = static_cast<int>(order.size());
    Matrix y(n, T), x(n, T);
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < T; ++t) {
        y(i, t) = cols[seen[order[i]].first][t];
        x(i, t) = cols[seen[order[i]].second][t];
      }
    Vector x0 = x.col(0);
    ds.names = order;
    ds.data = PanelData(std::move(y), std::move(x), std::move(x0));
    return ds;
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(source + ": ", 0) == 0) throw;
    throw ValidationError(source + ": " + msg);
  }
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  return parse_dataset(in, path);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << "t";
  for (const auto& name : ds.names) out << ',' << csv_escape("y_" + name) << ',' << csv_escape("x_" + name);
  out << "\r\n";
  for (int t = 0; t < ds.data.T(); ++t) {
    out << ds.t[t];
    for (int i = 0; i < ds.data.n(); ++i)
      out << ',' << format_number(ds.data.y(i, t)) << ',' << format_number(ds.data.x(i, t));
    out << "\r\n";
  }
}

}  // namespace fmgls::cli
