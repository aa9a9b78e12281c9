#include "widthlab/report.hpp"

#include "widthlab/common.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>

namespace widthlab {

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  out.close();
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace

std::string format_csv(const CsvTable& table) {
  if (table.schema.empty()) throw DomainError("emit_csv: empty schema");
  std::string out;
  for (std::size_t c = 0; c < table.schema.size(); ++c) {
    if (c) out += ',';
    out += table.schema[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.schema.size())
      throw DomainError(fmt::format("emit_csv: row {} has {} values for {} columns", r, row.size(),
                                    table.schema.size()));
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += fmt::format("{:.17g}", row[c]);
    }
    out += '\n';
  }
  return out;
}

void emit_csv(const CsvTable& table, const std::string& path) { write_file(path, format_csv(table)); }

bool RunReport::passed() const {
  for (const auto& a : assertions)
    if (!a.passed) return false;
  return true;
}

void RunReport::check(std::string name, bool ok, std::string measurement) {
  assertions.push_back({std::move(name), ok, std::move(measurement)});
}

std::string format_report(const RunReport& report) {
  std::string out = fmt::format("experiment: {}\n", to_string(report.kind));
  if (!report.certificates.empty()) {
    out += "\ncertificates\n";
    out += fmt::format("{:>12} {:>6} {:>24} {:>6}\n", "h", "n", "epsilon", "n_ent");
    for (const auto& row : report.certificates)
      out += fmt::format("{:>12.6g} {:>6} {:>24.17g} {:>6}\n", row.h, row.n, row.epsilon, row.n_ent);
  }
  if (report.fitted_exponent || report.theory_exponent) {
    out += "\nexponents\n";
    out += fmt::format("{:>24} {:>24} {:>48}\n", "entropy (fitted)", "entropy (theory)",
                       "lipschitz width, implied (strict inequality, log factors omitted)");
    const std::string fitted = report.fitted_exponent ? fmt::format("{:.6f}", *report.fitted_exponent) : "-";
    const std::string theory = report.theory_exponent ? fmt::format("{:.6f}", *report.theory_exponent) : "-";
    const std::string implied = report.theory_exponent ? fmt::format("alpha < {:.6f}", *report.theory_exponent) : "-";
    out += fmt::format("{:>24} {:>24} {:>48}\n", fitted, theory, implied);
  }
  out += "\nassertions\n";
  for (const auto& a : report.assertions)
    out += fmt::format("[{}] {}: {}\n", a.passed ? "PASS" : "FAIL", a.name, a.measurement);
  if (!report.notes.empty()) {
    out += "\nnotes\n";
    for (const auto& n : report.notes) out += "- " + n + "\n";
  }
  out += fmt::format("\nresult: {}\n", report.passed() ? "pass" : "fail");
  return out;
}

void write_outputs(const RunReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  emit_csv(report.table, (base / (to_string(report.kind) + ".csv")).string());
  write_file((base / "report.txt").string(), format_report(report));
}

}  // namespace widthlab
