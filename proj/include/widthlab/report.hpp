#pragma once

#include "widthlab/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace widthlab {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> schema;
  std::vector<std::vector<double>> rows;
};

// Header row, then one line per row; reals with 17 significant digits, LF
// line endings, rows in the given order. Throws DomainError for rows that do
// not match the schema and IoError when the path is not writable.
void emit_csv(const CsvTable& table, const std::string& path);
std::string format_csv(const CsvTable& table);

struct Assertion {
  std::string name;
  bool passed = false;
  std::string measurement;  // always filled, pass or fail
};

struct CertificateRow {
  double h = 0.0;
  std::size_t n = 0;
  double epsilon = 0.0;
  std::size_t n_ent = 0;
};

struct RunReport {
  ExperimentKind kind = ExperimentKind::fixed_b;
  std::vector<CertificateRow> certificates;
  std::optional<double> fitted_exponent;
  std::optional<double> theory_exponent;
  std::vector<Assertion> assertions;
  std::vector<std::string> notes;
  CsvTable table;
  double wall_time = 0.0;  // seconds; printed to the console, not written to files

  bool passed() const;
  void check(std::string name, bool ok, std::string measurement);
};

// Plain-text report. Deterministic: excludes the wall time.
std::string format_report(const RunReport& report);

// Writes <dir>/<kind>.csv and <dir>/report.txt.
void write_outputs(const RunReport& report, const std::string& dir);

}  // namespace widthlab
