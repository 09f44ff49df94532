#include "examweight/report.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "examweight/csv.hpp"
#include "examweight/errors.hpp"

namespace examweight::report {

namespace {

constexpr int kMaeDigits = 4;
constexpr int kAbilityDigits = 2;
const char* const kIntercept = "(intercept)";

Cell solver_cell(SolverId id) { return Cell::str(std::string(to_string(id))); }
Cell scale_cell(ScoreScale s) { return Cell::str(std::string(to_string(s))); }

}  // namespace

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ContractError("unknown format '" + std::string(s) + "' (csv or json)");
}

Cell Cell::str(std::string s) { return Cell{std::move(s), std::nullopt}; }

Cell Cell::real(double v) { return Cell{csv::format_real(v), v == 0.0 ? 0.0 : v}; }

Cell Cell::fixed(double v, int digits) {
  std::string text = csv::format_fixed(v, digits);
  return Cell{text, *csv::parse_real(text)};
}

Cell Cell::integer(long long v) { return Cell{std::to_string(v), static_cast<double>(v)}; }

Cell Cell::empty() { return Cell{}; }

std::string to_csv(const Table& t) {
  std::string out = csv::join(t.header) + "\n";
  for (const auto& row : t.rows) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (const Cell& c : row) fields.push_back(c.text);
    out += csv::join(fields) + "\n";
  }
  return out;
}

std::string to_json(const Table& t) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      const Cell& cell = row[c];
      if (cell.number) {
        obj[t.header[c]] = *cell.number;
      } else if (cell.text.empty()) {
        obj[t.header[c]] = nullptr;
      } else {
        obj[t.header[c]] = cell.text;
      }
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string render(const Table& t, Format f) { return f == Format::csv ? to_csv(t) : to_json(t); }

void write(const Table& t, Format f, const std::string& path) {
  const std::string text = render(t, f);
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw DataError("<stdout>: write failed");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path + ": write failed");
}

Table mae_table(const std::vector<EvaluationReport>& reports) {
  Table t;
  t.header = {"exam", "scale", "exclusion"};
  for (SolverId id : kAllApproaches) t.header.emplace_back(to_string(id));
  for (const EvaluationReport& r : reports) {
    for (const ApproachRecord& rec : r.records) {
      if (rec.approach != kAllApproaches[0]) continue;
      std::vector<Cell> row = {Cell::str(r.exam), scale_cell(rec.scale),
                               Cell::str(std::string(to_string(rec.exclusion)))};
      for (SolverId id : kAllApproaches) {
        bool found = false;
        for (const ApproachRecord& other : r.records) {
          if (other.approach == id && other.scale == rec.scale &&
              other.exclusion == rec.exclusion) {
            row.push_back(Cell::fixed(other.mae, kMaeDigits));
            found = true;
            break;
          }
        }
        if (!found) row.push_back(Cell::empty());
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table weights_table(const std::vector<EvaluationReport>& reports, bool fitted_only) {
  Table t;
  t.header = {"exam", "solver", "scale", "question", "weight"};
  for (const EvaluationReport& r : reports) {
    for (const ApproachRecord& rec : r.records) {
      if (rec.exclusion != r.records.front().exclusion) {
        throw ContractError("weights_table: report for '" + r.exam +
                            "' mixes exclusion modes");
      }
      if (fitted_only && !is_fitted(rec.approach)) continue;
      const VectorXd& w = rec.averaged_weights.question_weights;
      for (std::size_t j = 0; j < r.question_ids.size(); ++j) {
        t.rows.push_back({Cell::str(r.exam), solver_cell(rec.approach), scale_cell(rec.scale),
                          Cell::str(r.question_ids[j]),
                          Cell::real(w(static_cast<Eigen::Index>(j)))});
      }
      if (is_fitted(rec.approach)) {
        t.rows.push_back({Cell::str(r.exam), solver_cell(rec.approach), scale_cell(rec.scale),
                          Cell::str(kIntercept), Cell::real(rec.averaged_weights.intercept)});
      }
    }
  }
  return t;
}

Table distribution_table(const QuestionDiagnostic& d) {
  Table t;
  t.header = {"student", "score", "ability"};
  for (const DistributionRow& r : d.distribution) {
    t.rows.push_back({Cell::str(r.student), Cell::real(r.score), Cell::fixed(r.ability, kAbilityDigits)});
  }
  return t;
}

Table diagnostics_table(const std::vector<QuestionDiagnostic>& diags) {
  Table t;
  t.header = {"exam", "question", "flags"};
  for (SolverId id : kAllApproaches) t.header.emplace_back(to_string(id));
  for (const QuestionDiagnostic& d : diags) {
    std::string flags;
    for (const QuestionFlag& f : d.flags) {
      if (!flags.empty()) flags += ";";
      flags += f.to_string();
    }
    std::vector<Cell> row = {Cell::str(d.exam), Cell::str(d.question), Cell::str(flags)};
    for (SolverId id : kAllApproaches) {
      const auto it = d.weight_by_solver.find(id);
      row.push_back(it == d.weight_by_solver.end() ? Cell::empty() : Cell::real(it->second));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table extremes_table(const std::string& exam, const std::vector<ExtremeQuestions>& lists) {
  Table t;
  t.header = {"exam", "solver", "scale", "end", "rank", "question", "weight"};
  for (const ExtremeQuestions& e : lists) {
    for (const auto& [end, list] : {std::pair{"top", &e.top}, std::pair{"bottom", &e.bottom}}) {
      for (std::size_t k = 0; k < list->size(); ++k) {
        t.rows.push_back({Cell::str(exam), solver_cell(e.solver), scale_cell(e.scale),
                          Cell::str(end), Cell::integer(static_cast<long long>(k + 1)),
                          Cell::str((*list)[k].question), Cell::real((*list)[k].weight)});
      }
    }
  }
  return t;
}

Table exclusion_mae_table(const ExclusionComparison& c) {
  Table t;
  t.header = {"exam", "approach", "scale", "include_mae", "exclude_mae"};
  for (const MaeComparison& m : c.mae) {
    t.rows.push_back({Cell::str(c.include.exam), solver_cell(m.approach), scale_cell(m.scale),
                      Cell::fixed(m.include_mae, kMaeDigits),
                      Cell::fixed(m.exclude_mae, kMaeDigits)});
  }
  return t;
}

Table exclusion_delta_table(const ExclusionComparison& c) {
  Table t;
  t.header = {"exam", "approach", "scale", "question", "include_weight", "exclude_weight", "delta"};
  for (const WeightDelta& d : c.deltas) {
    t.rows.push_back({Cell::str(c.include.exam), solver_cell(d.approach), scale_cell(d.scale),
                      Cell::str(d.question), Cell::real(d.include_weight),
                      Cell::real(d.exclude_weight), Cell::real(d.delta)});
  }
  return t;
}

}  // namespace examweight::report
