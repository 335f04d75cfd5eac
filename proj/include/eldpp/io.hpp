#ifndef ELDPP_IO_HPP
#define ELDPP_IO_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eldpp/ensemble.hpp"
#include "eldpp/error.hpp"
#include "eldpp/kernels.hpp"
#include "eldpp/linalg.hpp"

// File formats. All indices are 0-based.
//   points:  CSV, header x1,...,xd, one point per row
//   matrix:  CSV, no header
//   samples: JSON lines, a metadata object then {"indices":[...]} per draw;
//            or CSV with "# key=value" metadata lines and one draw per line
//   graph:   whitespace edge list "u v [weight]", '#' starts a comment
namespace eldpp::io {

using Json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

[[noreturn]] inline void parse_error(const std::string& what, std::size_t line) {
  fail(ErrorKind::InvalidArgument, what + " (line " + std::to_string(line) + ")");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& field, std::size_t line) {
  const std::string t = trim(field);
  if (t.empty()) parse_error("empty numeric field", line);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) parse_error("not a number: '" + t + "'", line);
  return v;
}

inline long parse_index(const std::string& field, std::size_t line) {
  const std::string t = trim(field);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || v < 0)
    parse_error("not a non-negative integer: '" + t + "'", line);
  return v;
}

inline Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, Index cols) {
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace detail

inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

inline Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  Index cols = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& f : detail::split(line, ',')) row.push_back(detail::parse_double(f, lineno));
    if (cols >= 0 && static_cast<Index>(row.size()) != cols) detail::parse_error("ragged row", lineno);
    cols = static_cast<Index>(row.size());
    rows.push_back(std::move(row));
  }
  return detail::rows_to_matrix(rows, std::max<Index>(cols, 0));
}

inline void write_points_csv(std::ostream& out, const Matrix& points) {
  for (Index j = 0; j < points.cols(); ++j) out << (j ? "," : "") << 'x' << j + 1;
  out << '\n';
  write_matrix_csv(out, points);
}

inline Matrix read_points_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) fail(ErrorKind::InvalidArgument, "points file is empty");
  const auto names = detail::split(detail::trim(header), ',');
  for (std::size_t j = 0; j < names.size(); ++j)
    if (detail::trim(names[j]) != "x" + std::to_string(j + 1))
      detail::parse_error("points header must be x1,...,xd", 1);
  Matrix m = read_matrix_csv(in);
  if (m.rows() > 0 && m.cols() != static_cast<Index>(names.size()))
    fail(ErrorKind::InvalidArgument, "points rows do not match the header width");
  if (m.rows() == 0) m.resize(0, static_cast<Index>(names.size()));
  return m;
}

enum class SampleFormat { Jsonl, Csv };

inline SampleFormat parse_format(const std::string& s) {
  if (s == "jsonl") return SampleFormat::Jsonl;
  if (s == "csv") return SampleFormat::Csv;
  fail(ErrorKind::InvalidArgument, "unknown sample format '" + s + "'");
}

struct SampleFile {
  Json metadata = Json::object();
  std::vector<SampleSet> samples;
};

inline void write_samples(std::ostream& out, const SampleFile& file, SampleFormat format) {
  if (format == SampleFormat::Jsonl) {
    out << file.metadata.dump() << '\n';
    for (const auto& s : file.samples) out << Json{{"indices", s.indices()}}.dump() << '\n';
    return;
  }
  for (const auto& [key, value] : file.metadata.items())
    out << "# " << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  for (const auto& s : file.samples) {
    bool first = true;
    for (int i : s) {
      out << (first ? "" : ",") << i;
      first = false;
    }
    out << '\n';
  }
}

inline SampleFile read_samples(std::istream& in, SampleFormat format) {
  SampleFile file;
  std::string line;
  std::size_t lineno = 0;
  if (format == SampleFormat::Jsonl) {
    bool have_meta = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        detail::parse_error(std::string("invalid JSON: ") + e.what(), lineno);
      }
      if (!have_meta) {
        if (!j.is_object() || j.contains("indices"))
          detail::parse_error("first record must be the metadata object", lineno);
        file.metadata = std::move(j);
        have_meta = true;
        continue;
      }
      if (!j.is_object() || !j.contains("indices") || !j["indices"].is_array())
        detail::parse_error("expected {\"indices\":[...]}", lineno);
      std::vector<int> idx;
      for (const auto& v : j["indices"]) {
        if (!v.is_number_integer()) detail::parse_error("index is not an integer", lineno);
        idx.push_back(v.get<int>());
      }
      file.samples.emplace_back(std::move(idx));
    }
    return file;
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') {
      const std::string body = detail::trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) detail::parse_error("metadata line without '='", lineno);
      const std::string key = body.substr(0, eq), value = body.substr(eq + 1);
      Json parsed = Json::parse(value, nullptr, false);
      file.metadata[key] = parsed.is_discarded() ? Json(value) : parsed;
      continue;
    }
    std::vector<int> idx;
    if (!detail::trim(line).empty())
      for (const auto& f : detail::split(line, ','))
        idx.push_back(static_cast<int>(detail::parse_index(f, lineno)));
    file.samples.emplace_back(std::move(idx));
  }
  return file;
}

struct EdgeList {
  Index n = 0;
  std::vector<Edge> edges;
};

/// Vertex count is one past the largest vertex seen.
inline EdgeList read_edge_list(std::istream& in) {
  EdgeList g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3) detail::parse_error("expected 'u v [weight]'", lineno);
    Edge e;
    e.u = static_cast<int>(detail::parse_index(tok[0], lineno));
    e.v = static_cast<int>(detail::parse_index(tok[1], lineno));
    if (tok.size() == 3) e.weight = detail::parse_double(tok[2], lineno);
    g.n = std::max<Index>(g.n, std::max(e.u, e.v) + 1);
    g.edges.push_back(e);
  }
  return g;
}

inline void write_edge_list(std::ostream& out, const EdgeList& g) {
  for (const auto& e : g.edges) out << e.u << ' ' << e.v << ' ' << format_double(e.weight) << '\n';
}

inline Matrix load_matrix(const std::string& path) {
  auto in = detail::open_in(path);
  return read_matrix_csv(in);
}

inline Matrix load_points(const std::string& path) {
  auto in = detail::open_in(path);
  return read_points_csv(in);
}

inline EdgeList load_edge_list(const std::string& path) {
  auto in = detail::open_in(path);
  return read_edge_list(in);
}

inline SampleFile load_samples(const std::string& path, SampleFormat format) {
  auto in = detail::open_in(path);
  return read_samples(in, format);
}

inline void save_matrix(const std::string& path, const Matrix& m) {
  auto out = detail::open_out(path);
  write_matrix_csv(out, m);
}

inline void save_points(const std::string& path, const Matrix& points) {
  auto out = detail::open_out(path);
  write_points_csv(out, points);
}

inline void save_samples(const std::string& path, const SampleFile& file, SampleFormat format) {
  auto out = detail::open_out(path);
  write_samples(out, file, format);
}

}  // namespace eldpp::io

#endif  // ELDPP_IO_HPP
