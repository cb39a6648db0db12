#include "grouse/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

namespace grouse {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_real(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

namespace {

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return in;
}

double require_real(std::string_view field, const std::string& source, std::size_t line_no,
                    std::string_view what) {
  const auto value = parse_real(field);
  if (!value) {
    throw ParseError(source, line_no, "non-numeric " + std::string(what) + " '" + std::string(field) + "'");
  }
  return *value;
}

Index require_index(std::string_view field, const std::string& source, std::size_t line_no,
                    std::string_view what) {
  const double value = require_real(field, source, line_no, what);
  if (value < 0 || value != std::floor(value)) {
    throw ParseError(source, line_no, std::string(what) + " must be a non-negative integer");
  }
  return static_cast<Index>(value);
}

}  // namespace

std::optional<DenseMatrix> StreamData::dense() const {
  DenseMatrix m(ambient_dim(), static_cast<Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (static_cast<Index>(rows[t].support.size()) != ambient_dim()) return std::nullopt;
    m.col(static_cast<Index>(t)) = rows[t].values;
  }
  return m;
}

StreamData read_stream_csv(std::istream& in, const std::string& source) {
  StreamData data;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (!is_blank(line)) break;
  }
  if (line_no == 0 || is_blank(line)) throw ParseError(source, line_no, "missing header");
  for (auto field : split_fields(line)) data.header.emplace_back(field);
  const Index n = data.ambient_dim();

  while (next_line(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split_fields(line);
    if (static_cast<Index>(fields.size()) != n) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(n) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<Index> support;
    std::vector<double> values;
    for (Index i = 0; i < n; ++i) {
      const auto field = fields[static_cast<std::size_t>(i)];
      if (is_blank(field)) continue;
      support.push_back(i);
      values.push_back(require_real(field, source, line_no, "cell"));
    }
    data.rows.emplace_back(n, IndexSet(std::move(support), n),
                           Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
  }
  return data;
}

StreamData read_stream_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_stream_csv(in, path.string());
}

void write_stream_csv(std::ostream& out, const std::vector<MaskedVector>& rows,
                      const std::vector<std::string>& header) {
  const Index n = rows.empty() ? static_cast<Index>(header.size()) : rows.front().ambient_dim;
  for (Index i = 0; i < n; ++i) {
    if (i > 0) out << ',';
    out << (header.empty() ? "x" + std::to_string(i) : header[static_cast<std::size_t>(i)]);
  }
  out << '\n';
  for (const auto& row : rows) {
    std::size_t k = 0;
    for (Index i = 0; i < n; ++i) {
      if (i > 0) out << ',';
      if (k < row.support.size() && row.support[k] == i) {
        out << format_real(row.values[static_cast<Index>(k)]);
        ++k;
      }
    }
    out << '\n';
  }
}

std::vector<Entry> read_entries_csv(std::istream& in, const std::string& source) {
  std::vector<Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (next_line(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3) {
      throw ParseError(source, line_no, "expected 3 fields (row,col,value), found " + std::to_string(fields.size()));
    }
    if (!seen_header) {
      seen_header = true;
      if (!parse_real(fields[0])) continue;  // header line
    }
    entries.push_back({require_index(fields[0], source, line_no, "row"),
                       require_index(fields[1], source, line_no, "col"),
                       require_real(fields[2], source, line_no, "value")});
  }
  return entries;
}

std::vector<Entry> read_entries_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_entries_csv(in, path.string());
}

void write_entries_csv(std::ostream& out, const std::vector<Entry>& entries) {
  out << "row,col,value\n";
  for (const auto& e : entries) out << e.row << ',' << e.col << ',' << format_real(e.value) << '\n';
}

DenseMatrix read_matrix_csv(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::size_t cols = 0;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split_fields(line);
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(cols) + " fields, found " + std::to_string(fields.size()));
    }
    for (auto f : fields) values.push_back(require_real(f, source, line_no, "entry"));
    ++rows;
  }
  DenseMatrix m(rows, static_cast<Index>(cols));
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < static_cast<Index>(cols); ++j) {
      m(i, j) = values[static_cast<std::size_t>(i) * cols + static_cast<std::size_t>(j)];
    }
  }
  return m;
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_matrix_csv(in, path.string());
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_matrix_csv(out, m);
}

void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRow>& rows) {
  out << kTelemetryHeader << '\n';
  for (const auto& r : rows) {
    out << r.t << ',' << format_real(r.eta) << ',' << format_real(r.residual_signal) << ','
        << format_real(r.cost) << ',';
    if (r.subspace_error) out << format_real(*r.subspace_error);
    out << ',' << (r.skipped ? 1 : 0) << ',' << r.wall_nanos << '\n';
  }
}

std::vector<TelemetryRow> read_telemetry_csv(std::istream& in, const std::string& source) {
  std::vector<TelemetryRow> rows;
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line) || line != kTelemetryHeader) {
    throw ParseError(source, 1, "missing telemetry header");
  }
  ++line_no;
  while (next_line(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw ParseError(source, line_no, "expected 7 fields, found " + std::to_string(f.size()));
    }
    TelemetryRow row;
    row.t = static_cast<std::int64_t>(require_real(f[0], source, line_no, "t"));
    row.eta = require_real(f[1], source, line_no, "eta");
    row.residual_signal = require_real(f[2], source, line_no, "residual_signal");
    row.cost = require_real(f[3], source, line_no, "cost");
    if (!is_blank(f[4])) row.subspace_error = require_real(f[4], source, line_no, "subspace_error");
    row.skipped = require_real(f[5], source, line_no, "skipped") != 0.0;
    row.wall_nanos = static_cast<std::int64_t>(require_real(f[6], source, line_no, "wall_nanos"));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace grouse
