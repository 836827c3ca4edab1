#include "ppfit/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ppfit/errors.hpp"

namespace ppfit {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  return out;
}

// Reads one line, tolerating CRLF and a BOM on the first line.
bool next_line(std::istream& in, std::string& line, bool first) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (first && line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF') {
    line.erase(0, 3);
  }
  return true;
}

struct CsvReader {
  std::ifstream in;
  std::string path;
  int lineno = 0;
  std::vector<std::string> header;

  explicit CsvReader(const std::string& p, const std::vector<std::string>& required)
      : in(open_input(p)), path(p) {
    std::string line;
    if (!next_line(in, line, true)) throw input_error(path + ": empty file");
    ++lineno;
    for (std::string& tok : (header = split_csv_line(line))) tok = lower(trim(tok));
    if (header.size() < required.size()) {
      throw input_error(path + ": header must start with " + join(required));
    }
    for (std::size_t i = 0; i < required.size(); ++i) {
      if (header[i] != required[i]) {
        throw input_error(path + ": header must start with " + join(required) + ", got '" +
                          header[i] + "' in position " + std::to_string(i + 1));
      }
    }
  }

  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  }

  bool row(std::vector<std::string>& out) {
    std::string line;
    while (next_line(in, line, false)) {
      ++lineno;
      if (trim(line).empty()) continue;
      out = split_csv_line(line);
      return true;
    }
    return false;
  }

  std::string where() const { return path + ":" + std::to_string(lineno); }
};

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

double parse_double(const std::string& token, const std::string& context) {
  double v = 0;
  const char* b = token.data();
  const char* e = b + token.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
    throw input_error(context + ": cannot parse number '" + token + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[40];
  if (!std::isfinite(v)) {
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }
  // Shortest representation that round-trips a double.
  for (int prec = 1; prec <= 17; ++prec) {
    const int len = std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0;
    auto [ptr, ec] = std::from_chars(buf, buf + len, back);
    (void)ptr;
    if (ec == std::errc() && back == v) break;
  }
  return buf;
}

PointPattern read_pattern_csv(const std::string& path) {
  CsvReader r(path, {"x", "y"});
  const bool marked = r.header.size() >= 3 && r.header[2] == "mark";
  PointPattern p;
  std::vector<std::string> row;
  while (r.row(row)) {
    if (row.size() < 2) throw input_error(r.where() + ": expected x,y");
    p.points.push_back({parse_double(row[0], r.where()), parse_double(row[1], r.where())});
    if (marked) {
      if (row.size() < 3 || row[2].empty()) throw input_error(r.where() + ": missing mark");
      p.marks.push_back(row[2]);
    }
  }
  return p;
}

void write_pattern_csv(const std::string& path, const PointPattern& p) {
  std::ofstream out = open_output(path);
  out << (p.marked() ? "x,y,mark\n" : "x,y\n");
  for (int i = 0; i < p.size(); ++i) {
    out << format_double(p.points[i].x) << ',' << format_double(p.points[i].y);
    if (p.marked()) out << ',' << p.marks[i];
    out << '\n';
  }
}

SegmentPattern read_segments_csv(const std::string& path) {
  CsvReader r(path, {"x1", "y1", "x2", "y2"});
  SegmentPattern s;
  std::vector<std::string> row;
  while (r.row(row)) {
    if (row.size() < 4) throw input_error(r.where() + ": expected x1,y1,x2,y2");
    Segment seg{{parse_double(row[0], r.where()), parse_double(row[1], r.where())},
                {parse_double(row[2], r.where()), parse_double(row[3], r.where())}};
    if (seg.a.x == seg.b.x && seg.a.y == seg.b.y) {
      throw input_error(r.where() + ": zero-length segment");
    }
    s.segments.push_back(seg);
  }
  return s;
}

Window read_window_csv(const std::string& path) {
  CsvReader r(path, {"x", "y"});
  std::vector<Point> boundary;
  std::vector<std::string> row;
  while (r.row(row)) {
    if (row.size() < 2) throw input_error(r.where() + ": expected x,y");
    boundary.push_back({parse_double(row[0], r.where()), parse_double(row[1], r.where())});
  }
  return Window(boundary);
}

std::map<std::string, std::vector<Point>> read_zones_csv(const std::string& path) {
  CsvReader r(path, {"zone", "x", "y"});
  std::map<std::string, std::vector<Point>> zones;
  std::vector<std::string> row;
  while (r.row(row)) {
    if (row.size() < 3) throw input_error(r.where() + ": expected zone,x,y");
    zones[row[0]].push_back({parse_double(row[1], r.where()), parse_double(row[2], r.where())});
  }
  if (zones.empty()) throw input_error(path + ": no zone vertices");
  return zones;
}

std::map<std::string, double> read_zone_values_csv(const std::string& path) {
  CsvReader r(path, {"zone", "value"});
  std::map<std::string, double> values;
  std::vector<std::string> row;
  while (r.row(row)) {
    if (row.size() < 2) throw input_error(r.where() + ": expected zone,value");
    if (!values.emplace(row[0], parse_double(row[1], r.where())).second) {
      throw input_error(r.where() + ": duplicate zone '" + row[0] + "'");
    }
  }
  if (values.empty()) throw input_error(path + ": no zone values");
  return values;
}

Raster read_raster_asc(const std::string& path) {
  std::ifstream in = open_input(path);
  Raster r;
  unsigned seen = 0;  // bit per required key
  std::string key;
  // Header: five or six `key value` lines in any order, then the grid.
  for (int i = 0; i < 6; ++i) {
    std::streampos mark = in.tellg();
    if (!(in >> key)) throw input_error(path + ": truncated header");
    std::string k = lower(key);
    if (k == "ncols") {
      in >> r.ncols;
      seen |= 1;
    } else if (k == "nrows") {
      in >> r.nrows;
      seen |= 2;
    } else if (k == "xllcorner") {
      in >> r.x0;
      seen |= 4;
    } else if (k == "yllcorner") {
      in >> r.y0;
      seen |= 8;
    } else if (k == "cellsize") {
      in >> r.cell;
      seen |= 16;
    } else if (k == "nodata_value") {
      in >> r.nodata;
    } else {
      in.seekg(mark);  // start of the grid body
      break;
    }
    if (!in) throw input_error(path + ": bad header value after " + key);
  }
  if (seen != 31) {
    throw input_error(path + ": header must give ncols, nrows, xllcorner, yllcorner, cellsize");
  }
  if (r.ncols <= 0 || r.nrows <= 0 || !(r.cell > 0)) {
    throw input_error(path + ": invalid grid dimensions");
  }
  r.values.assign(static_cast<std::size_t>(r.ncols) * r.nrows, r.nodata);
  // Rows arrive top to bottom; storage is bottom-up.
  for (int iy = r.nrows - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < r.ncols; ++ix) {
      double v;
      if (!(in >> v)) throw input_error(path + ": truncated grid body");
      r.at(ix, iy) = v;
    }
  }
  return r;
}

void write_raster_asc(const std::string& path, const Raster& r) {
  std::ofstream out = open_output(path);
  out << "ncols " << r.ncols << "\n";
  out << "nrows " << r.nrows << "\n";
  out << "xllcorner " << format_double(r.x0) << "\n";
  out << "yllcorner " << format_double(r.y0) << "\n";
  out << "cellsize " << format_double(r.cell) << "\n";
  out << "NODATA_value " << format_double(r.nodata) << "\n";
  for (int iy = r.nrows - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < r.ncols; ++ix) {
      if (ix) out << ' ';
      out << format_double(r.at(ix, iy));
    }
    out << '\n';
  }
}

}  // namespace ppfit
