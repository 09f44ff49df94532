#pragma once

// Gradebook files: one components file plus a scores file and a questions
// file per exam.
//
//   components.csv        student,homework,midterm,project,final   (0-100, empty = missing)
//   <exam>_scores.csv     student,<question id>...                 (fractions in [0, 1])
//   <exam>_questions.csv  id,kind,max_points,parent                (kind mc|tf|sub)

#include <map>
#include <string>
#include <vector>

#include "examweight/gradebook.hpp"

namespace examweight {

struct ExamFiles {
  std::string name;
  std::string scores;
  std::string questions;
};

struct GradebookPaths {
  std::string components;
  std::vector<ExamFiles> exams;
};

/// dir/components.csv and dir/<exam>_{scores,questions}.csv.
GradebookPaths directory_layout(const std::string& dir, const std::vector<std::string>& exams);

/// Parse and validate. Every DataError names the file and, where there is
/// one, the line and column. Student order follows the first scores file.
Gradebook load_gradebook(const GradebookPaths& paths, GradebookChecks checks = {});

/// File name -> contents, in directory_layout naming.
using FileSet = std::map<std::string, std::string>;

FileSet serialize_gradebook(const Gradebook& g);

/// Write every file of serialize_gradebook into dir (created if needed).
void write_files(const FileSet& files, const std::string& dir);

}  // namespace examweight
