#include "examweight/dataio.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>

#include "examweight/csv.hpp"
#include "examweight/errors.hpp"

namespace examweight {

namespace {

const std::vector<std::string> kQuestionsHeader = {"id", "kind", "max_points", "parent"};
const std::vector<std::string> kComponentsHeader = {"student", "homework", "midterm", "project",
                                                    "final"};

std::string at(const csv::Document& doc, std::size_t line, std::size_t column) {
  return csv::location(doc.path, line, column) + ": ";
}

void expect_header(const csv::Document& doc, const std::vector<std::string>& want) {
  for (std::size_t c = 0; c < want.size(); ++c) {
    if (c >= doc.header.size() || doc.header[c] != want[c]) {
      throw DataError(at(doc, doc.header_line, c + 1) + "schema error: expected header '" +
                      csv::join(want) + "'");
    }
  }
  if (doc.header.size() != want.size()) {
    throw DataError(at(doc, doc.header_line, want.size() + 1) +
                    "schema error: unexpected extra column");
  }
}

double real_cell(const csv::Document& doc, const csv::Row& row, std::size_t c) {
  const auto v = csv::parse_real(row.fields[c]);
  if (!v) {
    throw DataError(at(doc, row.line, c + 1) + "malformed number '" + row.fields[c] + "'");
  }
  return *v;
}

QuestionKind parse_kind(const csv::Document& doc, const csv::Row& row) {
  const std::string& k = row.fields[1];
  if (k == "mc") return QuestionKind::multiple_choice;
  if (k == "tf") return QuestionKind::true_false;
  if (k == "sub") return QuestionKind::analytical_subpart;
  throw DataError(at(doc, row.line, 2) + "unknown question kind '" + k + "' (mc, tf or sub)");
}

std::vector<Question> load_questions(const std::string& path) {
  const csv::Document doc = csv::read_file(path);
  expect_header(doc, kQuestionsHeader);
  if (doc.rows.empty()) throw DataError(path + ": schema error: no questions");
  std::vector<Question> out;
  std::set<std::string> seen;
  for (const csv::Row& row : doc.rows) {
    Question q;
    q.id = row.fields[0];
    if (q.id.empty()) throw DataError(at(doc, row.line, 1) + "empty question id");
    if (!seen.insert(q.id).second) {
      throw DataError(at(doc, row.line, 1) + "duplicate question id '" + q.id + "'");
    }
    q.kind = parse_kind(doc, row);
    q.max_points = real_cell(doc, row, 2);
    if (!(q.max_points > 0.0)) {
      throw DataError(at(doc, row.line, 3) + "range error: max_points must be > 0");
    }
    const bool is_sub = q.kind == QuestionKind::analytical_subpart;
    if (is_sub && row.fields[3].empty()) {
      throw DataError(at(doc, row.line, 4) + "subpart '" + q.id + "' needs a parent");
    }
    if (!is_sub && !row.fields[3].empty()) {
      throw DataError(at(doc, row.line, 4) + "only subparts (kind sub) have a parent");
    }
    if (is_sub) q.parent = row.fields[3];
    out.push_back(std::move(q));
  }
  return out;
}

struct LoadedScores {
  std::vector<std::string> students;
  MatrixXd scores;  // columns in question-file order
};

LoadedScores load_scores(const std::string& path, const std::vector<Question>& questions,
                         const std::string& questions_path) {
  const csv::Document doc = csv::read_file(path);
  if (doc.header.empty() || doc.header[0] != "student") {
    throw DataError(at(doc, doc.header_line, 1) + "schema error: first column must be 'student'");
  }
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t j = 0; j < questions.size(); ++j) {
    index.emplace(questions[j].id, static_cast<Eigen::Index>(j));
  }
  std::vector<Eigen::Index> target(doc.header.size(), -1);
  std::set<Eigen::Index> covered;
  for (std::size_t c = 1; c < doc.header.size(); ++c) {
    const auto it = index.find(doc.header[c]);
    if (it == index.end()) {
      throw DataError(at(doc, doc.header_line, c + 1) + "schema error: unknown question id '" +
                      doc.header[c] + "' (not in " + questions_path + ")");
    }
    if (!covered.insert(it->second).second) {
      throw DataError(at(doc, doc.header_line, c + 1) + "schema error: duplicate question '" +
                      doc.header[c] + "'");
    }
    target[c] = it->second;
  }
  for (std::size_t j = 0; j < questions.size(); ++j) {
    if (!covered.count(static_cast<Eigen::Index>(j))) {
      throw DataError(path + ": schema error: no column for question '" + questions[j].id + "'");
    }
  }
  if (doc.rows.empty()) throw DataError(path + ": schema error: no students");

  LoadedScores out;
  out.scores.resize(static_cast<Eigen::Index>(doc.rows.size()),
                    static_cast<Eigen::Index>(questions.size()));
  std::set<std::string> seen;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const csv::Row& row = doc.rows[r];
    const std::string& id = row.fields[0];
    if (id.empty()) throw DataError(at(doc, row.line, 1) + "empty student id");
    if (!seen.insert(id).second) {
      throw DataError(at(doc, row.line, 1) + "duplicate student '" + id + "'");
    }
    out.students.push_back(id);
    for (std::size_t c = 1; c < row.fields.size(); ++c) {
      const double v = real_cell(doc, row, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError(at(doc, row.line, c + 1) + "range error: score " + row.fields[c] +
                        " outside [0, 1]");
      }
      out.scores(static_cast<Eigen::Index>(r), target[c]) = v;
    }
  }
  return out;
}

std::map<std::string, ComponentScores> load_components(const std::string& path) {
  const csv::Document doc = csv::read_file(path);
  expect_header(doc, kComponentsHeader);
  std::map<std::string, ComponentScores> out;
  for (const csv::Row& row : doc.rows) {
    const std::string& id = row.fields[0];
    if (id.empty()) throw DataError(at(doc, row.line, 1) + "empty student id");
    ComponentScores cs;
    for (std::size_t c = 1; c < row.fields.size(); ++c) {
      if (row.fields[c].find_first_not_of(" \t") == std::string::npos) continue;
      const double v = real_cell(doc, row, c);
      if (!(v >= 0.0 && v <= 100.0)) {
        throw DataError(at(doc, row.line, c + 1) + "range error: component " + row.fields[c] +
                        " outside [0, 100]");
      }
      cs.values[c - 1] = v;
    }
    if (!out.emplace(id, cs).second) {
      throw DataError(at(doc, row.line, 1) + "duplicate student '" + id + "'");
    }
  }
  return out;
}

std::string kind_code(QuestionKind k) { return std::string(to_string(k)); }

}  // namespace

GradebookPaths directory_layout(const std::string& dir, const std::vector<std::string>& exams) {
  const std::filesystem::path base(dir);
  GradebookPaths p;
  p.components = (base / "components.csv").string();
  for (const std::string& e : exams) {
    p.exams.push_back({e, (base / (e + "_scores.csv")).string(),
                       (base / (e + "_questions.csv")).string()});
  }
  return p;
}

Gradebook load_gradebook(const GradebookPaths& paths, GradebookChecks checks) {
  std::vector<std::string> students;
  std::vector<Exam> exams;
  for (const ExamFiles& f : paths.exams) {
    Exam e;
    e.name = f.name;
    e.questions = load_questions(f.questions);
    LoadedScores s = load_scores(f.scores, e.questions, f.questions);
    if (exams.empty()) {
      students = s.students;
      e.scores = std::move(s.scores);
    } else {
      std::unordered_map<std::string, Eigen::Index> row_of;
      for (std::size_t i = 0; i < s.students.size(); ++i) {
        row_of.emplace(s.students[i], static_cast<Eigen::Index>(i));
      }
      if (s.students.size() != students.size()) {
        throw DataError(f.scores + ": has " + std::to_string(s.students.size()) +
                        " students but " + paths.exams.front().scores + " has " +
                        std::to_string(students.size()));
      }
      e.scores.resize(s.scores.rows(), s.scores.cols());
      for (std::size_t i = 0; i < students.size(); ++i) {
        const auto it = row_of.find(students[i]);
        if (it == row_of.end()) {
          throw DataError(f.scores + ": student '" + students[i] + "' is missing");
        }
        e.scores.row(static_cast<Eigen::Index>(i)) = s.scores.row(it->second);
      }
    }
    exams.push_back(std::move(e));
  }

  const auto comps = load_components(paths.components);
  if (exams.empty()) {
    for (const auto& [id, c] : comps) students.push_back(id);
  }
  std::vector<ComponentScores> ordered;
  for (const std::string& s : students) {
    const auto it = comps.find(s);
    if (it == comps.end()) {
      throw DataError(paths.components + ": no row for student '" + s + "'");
    }
    ordered.push_back(it->second);
  }
  if (comps.size() != students.size()) {
    const std::set<std::string> known(students.begin(), students.end());
    for (const auto& [id, c] : comps) {
      if (!known.count(id)) {
        throw DataError(paths.components + ": student '" + id + "' has no exam scores");
      }
    }
  }
  try {
    return Gradebook(std::move(students), std::move(exams), std::move(ordered), checks);
  } catch (const DataError& e) {
    throw DataError(paths.components + ": " + e.what());
  }
}

FileSet serialize_gradebook(const Gradebook& g) {
  FileSet out;
  {
    std::string text = csv::join(kComponentsHeader) + "\n";
    for (std::size_t i = 0; i < g.students().size(); ++i) {
      std::vector<std::string> row = {g.students()[i]};
      for (Component c : kComponents) {
        const auto& v = g.components()[i][c];
        row.push_back(v ? csv::format_real(*v) : "");
      }
      text += csv::join(row) + "\n";
    }
    out["components.csv"] = std::move(text);
  }
  for (const Exam& e : g.exams()) {
    std::string q = csv::join(kQuestionsHeader) + "\n";
    for (const Question& question : e.questions) {
      q += csv::join({question.id, kind_code(question.kind), csv::format_real(question.max_points),
                      question.parent.value_or("")}) +
           "\n";
    }
    out[e.name + "_questions.csv"] = std::move(q);

    std::vector<std::string> header = {"student"};
    for (const Question& question : e.questions) header.push_back(question.id);
    std::string s = csv::join(header) + "\n";
    for (Eigen::Index i = 0; i < e.scores.rows(); ++i) {
      std::vector<std::string> row = {g.students()[static_cast<std::size_t>(i)]};
      for (Eigen::Index j = 0; j < e.scores.cols(); ++j) {
        row.push_back(csv::format_real(e.scores(i, j)));
      }
      s += csv::join(row) + "\n";
    }
    out[e.name + "_scores.csv"] = std::move(s);
  }
  return out;
}

void write_files(const FileSet& files, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(dir + ": cannot create directory: " + ec.message());
  for (const auto& [name, text] : files) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw DataError(path + ": write failed");
  }
}

}  // namespace examweight
