#pragma once

// Tabular report output. Every report is built as a Table first; the CSV and
// JSON writers render the same cells, so the two formats carry the same
// content.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "examweight/analysis.hpp"
#include "examweight/experiment.hpp"

namespace examweight::report {

enum class Format { csv, json };

Format parse_format(std::string_view s);

struct Cell {
  std::string text;              // rendered CSV field
  std::optional<double> number;  // JSON number (already rounded like the text)

  static Cell str(std::string s);
  static Cell real(double v);               // shortest round-trip
  static Cell fixed(double v, int digits);  // rounded to `digits` decimals
  static Cell integer(long long v);
  static Cell empty();
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string to_csv(const Table& t);
/// Array of objects keyed by header; empty cells become null.
std::string to_json(const Table& t);
std::string render(const Table& t, Format f);

/// Write to `path`, or to stdout when path is empty or "-".
void write(const Table& t, Format f, const std::string& path);

/// exam, scale, exclusion, then one MAE column per approach (4 decimals).
Table mae_table(const std::vector<EvaluationReport>& reports);

/// Long format: exam, solver, scale, question, weight (full precision). The
/// intercept of fitted solvers appears as question "(intercept)". A report
/// may hold only one exclusion mode here.
Table weights_table(const std::vector<EvaluationReport>& reports, bool fitted_only = false);

/// student, score, ability (ability to 2 decimals).
Table distribution_table(const QuestionDiagnostic& d);

/// exam, question, flags (';'-joined), then one weight column per approach.
Table diagnostics_table(const std::vector<QuestionDiagnostic>& diags);

/// exam, solver, scale, end (top|bottom), rank, question, weight.
Table extremes_table(const std::string& exam, const std::vector<ExtremeQuestions>& lists);

/// approach, scale, include_mae, exclude_mae (4 decimals).
Table exclusion_mae_table(const ExclusionComparison& c);

/// approach, scale, question, include_weight, exclude_weight, delta.
Table exclusion_delta_table(const ExclusionComparison& c);

}  // namespace examweight::report
