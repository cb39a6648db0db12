#pragma once

// CSV formats (UTF-8, LF line endings, '.' decimal separator, shortest
// round-trip formatting for reals):
//
//   stream    header of n column names, then one vector per row; an empty
//             field is an unobserved entry. Blank lines are skipped, so a
//             one-column stream cannot carry a fully unobserved row.
//   entries   header "row,col,value", then one observed entry per line.
//   matrix    one matrix row per line, no header.
//   telemetry header "t,eta,residual_signal,cost,subspace_error,skipped,wall_nanos";
//             subspace_error is empty when the true subspace is unknown.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grouse/completion.hpp"
#include "grouse/linalg.hpp"

namespace grouse {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Shortest decimal text that parses back to exactly `x`.
std::string format_real(double x);
/// Strict parse of a whole field; std::nullopt if it is not a finite number.
std::optional<double> parse_real(std::string_view text);

struct StreamData {
  std::vector<std::string> header;
  std::vector<MaskedVector> rows;

  Index ambient_dim() const { return static_cast<Index>(header.size()); }
  /// Dense n x T matrix of the rows if no cell is missing.
  std::optional<DenseMatrix> dense() const;
};

StreamData read_stream_csv(std::istream& in, const std::string& source = "<stream>");
StreamData read_stream_csv(const std::filesystem::path& path);
void write_stream_csv(std::ostream& out, const std::vector<MaskedVector>& rows,
                      const std::vector<std::string>& header = {});

std::vector<Entry> read_entries_csv(std::istream& in, const std::string& source = "<entries>");
std::vector<Entry> read_entries_csv(const std::filesystem::path& path);
void write_entries_csv(std::ostream& out, const std::vector<Entry>& entries);

DenseMatrix read_matrix_csv(std::istream& in, const std::string& source = "<matrix>");
DenseMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const DenseMatrix& m);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);

struct TelemetryRow {
  std::int64_t t = 0;
  double eta = 0.0;
  double residual_signal = 0.0;
  double cost = 0.0;
  std::optional<double> subspace_error;
  bool skipped = false;
  std::int64_t wall_nanos = 0;

  bool operator==(const TelemetryRow&) const = default;
};

inline constexpr std::string_view kTelemetryHeader =
    "t,eta,residual_signal,cost,subspace_error,skipped,wall_nanos";

void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRow>& rows);
std::vector<TelemetryRow> read_telemetry_csv(std::istream& in, const std::string& source = "<telemetry>");

/// Splits one CSV line on commas (no quoting; none of the formats need it).
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace grouse
