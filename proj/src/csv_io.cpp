#include "gridseg/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include <fmt/format.h>

namespace gridseg::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::invalid_argument(fmt::format("csv line {}: {}", line_no, what));
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) fail(line_no, fmt::format("bad number '{}'", s));
  return v;
}

int parse_int(std::string_view s, std::size_t line_no) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) fail(line_no, fmt::format("bad index '{}'", s));
  return v;
}

// Validates `a,b,x1..xp` and returns p.
std::size_t check_header(const std::string& line, std::string_view a, std::string_view b) {
  const auto fields = split(line);
  if (fields.size() < 3 || fields[0] != a || fields[1] != b) {
    fail(1, fmt::format("header must start with '{},{},x1'", a, b));
  }
  for (std::size_t i = 2; i < fields.size(); ++i) {
    if (fields[i] != fmt::format("x{}", i - 1)) fail(1, fmt::format("expected column 'x{}', got '{}'", i - 1, fields[i]));
  }
  return fields.size() - 2;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return in;
}

}  // namespace

Grid read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty grid csv");
  const std::size_t p = check_header(line, "w", "h");

  struct Row {
    int w;
    int h;
    std::size_t line_no;
    std::vector<double> x;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  int tw = 0, th = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != p + 2) fail(line_no, fmt::format("expected {} fields, got {}", p + 2, f.size()));
    Row row{parse_int(f[0], line_no), parse_int(f[1], line_no), line_no, {}};
    if (row.w < 1 || row.h < 1) fail(line_no, "cell indices are 1-based");
    row.x.reserve(p);
    for (std::size_t k = 0; k < p; ++k) row.x.push_back(parse_double(f[k + 2], line_no));
    tw = std::max(tw, row.w);
    th = std::max(th, row.h);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("grid csv has no rows");

  const std::size_t cells = static_cast<std::size_t>(tw) * static_cast<std::size_t>(th);
  std::vector<double> values(cells * p, 0.0);
  std::vector<char> seen(cells, 0);
  for (const auto& r : rows) {
    const std::size_t c = static_cast<std::size_t>(r.w - 1) * static_cast<std::size_t>(th) + static_cast<std::size_t>(r.h - 1);
    if (seen[c]) fail(r.line_no, fmt::format("duplicate cell ({},{})", r.w, r.h));
    seen[c] = 1;
    std::copy(r.x.begin(), r.x.end(), values.begin() + static_cast<std::ptrdiff_t>(c * p));
  }
  if (rows.size() != cells) {
    for (std::size_t c = 0; c < cells; ++c) {
      if (!seen[c]) {
        throw std::invalid_argument(fmt::format("grid csv is missing cell ({},{})", c / static_cast<std::size_t>(th) + 1,
                                                c % static_cast<std::size_t>(th) + 1));
      }
    }
  }
  return Grid(tw, th, static_cast<int>(p), std::move(values));
}

Grid read_grid_csv_file(const std::string& path) {
  auto in = open(path);
  return read_grid_csv(in);
}

std::string format_double(double v) { return fmt::format("{}", v); }

void write_grid_csv(std::ostream& out, const Grid& grid) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "w,h");
  for (int k = 1; k <= grid.p(); ++k) fmt::format_to(std::back_inserter(buf), ",x{}", k);
  buf.push_back('\n');
  for (int w = 1; w <= grid.tw(); ++w) {
    for (int h = 1; h <= grid.th(); ++h) {
      fmt::format_to(std::back_inserter(buf), "{},{}", w, h);
      for (double x : grid.at(w, h)) fmt::format_to(std::back_inserter(buf), ",{}", x);
      buf.push_back('\n');
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<ScatterPoint> read_scatter_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty scatter csv");
  const std::size_t p = check_header(line, "cx", "cy");
  std::vector<ScatterPoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != p + 2) fail(line_no, fmt::format("expected {} fields, got {}", p + 2, f.size()));
    ScatterPoint pt{parse_double(f[0], line_no), parse_double(f[1], line_no), {}};
    pt.obs.reserve(p);
    for (std::size_t k = 0; k < p; ++k) pt.obs.push_back(parse_double(f[k + 2], line_no));
    points.push_back(std::move(pt));
  }
  return points;
}

std::vector<ScatterPoint> read_scatter_csv_file(const std::string& path) {
  auto in = open(path);
  return read_scatter_csv(in);
}

}  // namespace gridseg::io
