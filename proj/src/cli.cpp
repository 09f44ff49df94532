#include "examweight/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "examweight/analysis.hpp"
#include "examweight/dataio.hpp"
#include "examweight/errors.hpp"
#include "examweight/experiment.hpp"
#include "examweight/report.hpp"
#include "examweight/synthetic.hpp"

namespace examweight::cli {

namespace {

// Raised for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataOptions {
  std::string data_dir;
  std::string scores;
  std::string questions;
  std::string components;
  std::vector<std::string> exams = {"final"};
  bool no_consistency_check = false;
};

struct SolverOptions {
  double epsilon = SolverConfig{}.huber_epsilon;
  double alpha = SolverConfig{}.huber_regularization;
  double tolerance = SolverConfig{}.huber_tolerance;
  int max_iterations = SolverConfig{}.huber_max_iterations;

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.huber_epsilon = epsilon;
    cfg.huber_regularization = alpha;
    cfg.huber_tolerance = tolerance;
    cfg.huber_max_iterations = max_iterations;
    if (!(epsilon > 1.0)) throw UsageError("--epsilon must be > 1");
    if (!(alpha >= 0.0)) throw UsageError("--alpha must be >= 0");
    if (!(tolerance > 0.0)) throw UsageError("--tolerance must be > 0");
    if (max_iterations < 0) throw UsageError("--max-iterations must be >= 0");
    return cfg;
  }
};

struct OutputOptions {
  std::string out;
  std::string format = "csv";
};

void add_data_options(CLI::App* app, DataOptions& d, bool many_exams) {
  app->add_option("--data", d.data_dir,
                  "Directory holding components.csv and <exam>_{scores,questions}.csv");
  app->add_option("--scores", d.scores, "Scores CSV for the exam");
  app->add_option("--questions", d.questions, "Questions CSV for the exam");
  app->add_option("--components", d.components, "Components CSV");
  if (many_exams) {
    app->add_option("--exam", d.exams, "Exam name (repeatable)")->capture_default_str();
  } else {
    app->add_option("--exam", d.exams.front(), "Exam name")->capture_default_str();
  }
  app->add_flag("--no-consistency-check", d.no_consistency_check,
                "Skip the component vs exam total check");
}

void add_solver_options(CLI::App* app, SolverOptions& s) {
  app->add_option("--epsilon", s.epsilon, "Huber threshold")->capture_default_str();
  app->add_option("--alpha", s.alpha, "Huber ridge penalty")->capture_default_str();
  app->add_option("--tolerance", s.tolerance, "Huber gradient-norm tolerance")
      ->capture_default_str();
  app->add_option("--max-iterations", s.max_iterations, "Huber Newton iteration cap")
      ->capture_default_str();
}

void add_output_options(CLI::App* app, OutputOptions& o) {
  app->add_option("--out", o.out, "Output path (default stdout)");
  app->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

Gradebook load(const DataOptions& d) {
  GradebookPaths paths;
  if (!d.data_dir.empty()) {
    if (!d.scores.empty() || !d.questions.empty()) {
      throw UsageError("--data cannot be combined with --scores/--questions");
    }
    paths = directory_layout(d.data_dir, d.exams);
    if (!d.components.empty()) paths.components = d.components;
  } else {
    if (d.scores.empty() || d.questions.empty() || d.components.empty()) {
      throw UsageError("give --data DIR, or all of --scores, --questions and --components");
    }
    if (d.exams.size() != 1) throw UsageError("--scores/--questions describe a single --exam");
    paths.components = d.components;
    paths.exams.push_back({d.exams.front(), d.scores, d.questions});
  }
  GradebookChecks checks;
  checks.consistency = !d.no_consistency_check;
  return load_gradebook(paths, checks);
}

std::vector<ScoreScale> scales_from(const std::string& s) {
  if (s == "both") return {ScoreScale::normalized, ScoreScale::actual};
  return {parse_scale(s)};
}

void emit(const report::Table& t, const OutputOptions& o, std::ostream& out) {
  const report::Format f = report::parse_format(o.format);
  if (o.out.empty() || o.out == "-") {
    out << report::render(t, f);
  } else {
    report::write(t, f, o.out);
  }
}

void emit_to(const report::Table& t, const std::string& format, const std::string& path) {
  report::write(t, report::parse_format(format), path);
}

// Non-converged records: fatal under --strict, a warning otherwise.
void check_convergence(const std::vector<EvaluationReport>& reports, bool strict,
                       std::ostream& err) {
  for (const EvaluationReport& r : reports) {
    for (const ApproachRecord& rec : r.records) {
      if (rec.converged) continue;
      std::ostringstream msg;
      msg << r.exam << "/" << to_string(rec.approach) << "/" << to_string(rec.scale) << "/"
          << to_string(rec.exclusion) << ": some folds stopped short of the tolerance "
          << "(max gradient norm " << rec.averaged_weights.gradient_norm << ")";
      if (strict) throw ConvergenceError(msg.str());
      err << "warning: " << msg.str() << "\n";
    }
  }
}

Exclusion exclusion_from(bool exclude) {
  return exclude ? Exclusion::exclude_exam : Exclusion::include_exam;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal per-question exam weights", "examweight"};
  app.require_subcommand(1);
  bool strict = false;
  app.add_flag("--strict", strict, "Treat solver non-convergence as fatal (exit 2)");

  // fit
  DataOptions fit_data;
  SolverOptions fit_solver;
  OutputOptions fit_out;
  std::string fit_solver_name = "all";
  std::string fit_scale = "both";
  bool fit_exclude = false;
  CLI::App* fit = app.add_subcommand("fit", "LOOCV-averaged weights of the fitted solvers");
  add_data_options(fit, fit_data, false);
  add_solver_options(fit, fit_solver);
  add_output_options(fit, fit_out);
  fit->add_option("--solver", fit_solver_name, "ols, linear, huber, nnls or all")
      ->check(CLI::IsMember({"ols", "linear", "huber", "nnls", "all"}))
      ->capture_default_str();
  fit->add_option("--scale", fit_scale, "actual, normalized or both")
      ->check(CLI::IsMember({"actual", "normalized", "both"}))
      ->capture_default_str();
  fit->add_flag("--exclude-exam", fit_exclude, "Leave the exam's own component out of ability");

  // evaluate
  DataOptions ev_data;
  SolverOptions ev_solver;
  OutputOptions ev_out;
  std::string ev_scale = "both";
  bool ev_exclude = false;
  bool ev_compare = false;
  std::string ev_weights_out;
  std::string ev_deltas_out;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "MAE of every approach");
  add_data_options(evaluate_cmd, ev_data, true);
  add_solver_options(evaluate_cmd, ev_solver);
  add_output_options(evaluate_cmd, ev_out);
  evaluate_cmd->add_option("--scale", ev_scale, "actual, normalized or both")
      ->check(CLI::IsMember({"actual", "normalized", "both"}))
      ->capture_default_str();
  evaluate_cmd->add_flag("--exclude-exam", ev_exclude,
                         "Leave the exam's own component out of ability");
  evaluate_cmd->add_flag("--compare-exclusion", ev_compare,
                         "Report include vs exclude MAE instead of the plain table");
  evaluate_cmd->add_option("--weights-out", ev_weights_out, "Also write the long weights table");
  evaluate_cmd->add_option("--deltas-out", ev_deltas_out,
                           "With --compare-exclusion: write per-question weight deltas");

  // analyze
  DataOptions an_data;
  SolverOptions an_solver;
  OutputOptions an_out;
  std::string an_question;
  std::size_t an_extremes = 0;
  bool an_degenerate = false;
  std::string an_solver_name = "linear";
  std::string an_scale = "actual";
  bool an_exclude = false;
  CLI::App* analyze = app.add_subcommand("analyze", "Question diagnostics");
  add_data_options(analyze, an_data, false);
  add_solver_options(analyze, an_solver);
  add_output_options(analyze, an_out);
  auto* q_opt = analyze->add_option("--question", an_question, "Score-vs-ability table");
  auto* x_opt = analyze->add_option("--extremes", an_extremes, "k largest and smallest weights")
                    ->check(CLI::PositiveNumber);
  auto* d_opt = analyze->add_flag("--degenerate", an_degenerate,
                                  "Flag all-correct, all-zero, duplicate and top-only questions");
  q_opt->excludes(x_opt)->excludes(d_opt);
  x_opt->excludes(d_opt);
  analyze->add_option("--solver", an_solver_name, "Solver for --extremes")
      ->check(CLI::IsMember({"ols", "linear", "huber", "nnls"}))
      ->capture_default_str();
  analyze->add_option("--scale", an_scale, "actual or normalized")
      ->check(CLI::IsMember({"actual", "normalized"}))
      ->capture_default_str();
  analyze->add_flag("--exclude-exam", an_exclude, "Leave the exam's own component out of ability");

  // generate
  std::string gen_spec;
  std::optional<int> gen_students;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> gen_noise;
  std::optional<double> gen_discrimination;
  bool gen_exact = false;
  std::string gen_out;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic gradebook");
  generate->add_option("--spec", gen_spec, "JSON spec file; flags override its fields");
  generate->add_option("--students", gen_students, "Number of students");
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--noise", gen_noise, "Stddev of homework/project noise, points");
  generate->add_option("--discrimination", gen_discrimination, "Item discrimination");
  generate->add_flag("--exact", gen_exact,
                     "Final exam only; every component equals its percentage total");
  generate->add_option("--out", gen_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (const char* env = std::getenv("EXAMWEIGHT_STRICT"); env && std::string(env) == "1") {
    strict = true;
  }

  try {
    if (*fit) {
      const SolverConfig cfg = fit_solver.config();
      const Gradebook g = load(fit_data);
      std::vector<SolverId> solvers;
      if (fit_solver_name == "all") {
        solvers.assign(std::begin(kFittedSolvers), std::end(kFittedSolvers));
      } else {
        solvers.push_back(parse_solver_id(fit_solver_name));
      }
      const auto scales = scales_from(fit_scale);
      const Exclusion ex[] = {exclusion_from(fit_exclude)};
      const std::vector<EvaluationReport> reports = {
          examweight::evaluate(g, fit_data.exams.front(), cfg, scales, ex, solvers)};
      check_convergence(reports, strict, err);
      emit(report::weights_table(reports, true), fit_out, out);
    } else if (*evaluate_cmd) {
      const SolverConfig cfg = ev_solver.config();
      if (!ev_deltas_out.empty() && !ev_compare) {
        throw UsageError("--deltas-out needs --compare-exclusion");
      }
      if (ev_compare && ev_exclude) {
        throw UsageError("--compare-exclusion already runs both exclusion modes");
      }
      const Gradebook g = load(ev_data);
      const auto scales = scales_from(ev_scale);
      if (ev_compare) {
        if (ev_data.exams.size() != 1) throw UsageError("--compare-exclusion takes one --exam");
        const ExclusionComparison c = exclusion_comparison(g, ev_data.exams.front(), cfg, scales);
        check_convergence({c.include, c.exclude}, strict, err);
        emit(report::exclusion_mae_table(c), ev_out, out);
        if (!ev_deltas_out.empty()) {
          emit_to(report::exclusion_delta_table(c), ev_out.format, ev_deltas_out);
        }
        if (!ev_weights_out.empty()) {
          emit_to(report::weights_table({c.include}), ev_out.format, ev_weights_out);
        }
      } else {
        const Exclusion ex[] = {exclusion_from(ev_exclude)};
        std::vector<EvaluationReport> reports;
        for (const std::string& exam : ev_data.exams) {
          reports.push_back(examweight::evaluate(g, exam, cfg, scales, ex));
        }
        check_convergence(reports, strict, err);
        emit(report::mae_table(reports), ev_out, out);
        if (!ev_weights_out.empty()) {
          emit_to(report::weights_table(reports), ev_out.format, ev_weights_out);
        }
      }
    } else if (*analyze) {
      const SolverConfig cfg = an_solver.config();
      const Gradebook g = load(an_data);
      const std::string& exam = an_data.exams.front();
      const ScoreScale scale = parse_scale(an_scale);
      const Exclusion exclusion = exclusion_from(an_exclude);
      if (!an_question.empty()) {
        const AbilityVector a = ability(g, exam, scale, exclusion);
        emit(report::distribution_table(distribution_table(g, exam, an_question, a)), an_out, out);
      } else {
        const ScoreScale scales[] = {scale};
        const Exclusion ex[] = {exclusion};
        const EvaluationReport r = examweight::evaluate(g, exam, cfg, scales, ex);
        check_convergence({r}, strict, err);
        if (an_extremes > 0) {
          const ExtremeQuestions e =
              extreme_questions(r, parse_solver_id(an_solver_name), an_extremes, scale);
          emit(report::extremes_table(r.exam, {e}), an_out, out);
        } else {
          auto diags = degenerate_questions(g, exam, ability(g, exam, scale, exclusion));
          for (QuestionDiagnostic& d : diags) attach_weights(d, r, scale, exclusion);
          emit(report::diagnostics_table(diags), an_out, out);
        }
      }
    } else if (*generate) {
      SyntheticSpec spec;
      if (!gen_spec.empty()) {
        std::ifstream in(gen_spec, std::ios::binary);
        if (!in) throw DataError(gen_spec + ": cannot open for reading");
        std::ostringstream text;
        text << in.rdbuf();
        try {
          spec = parse_synthetic_spec(text.str());
        } catch (const Error& e) {
          throw DataError(gen_spec + ": " + e.what());
        }
      }
      if (gen_students) spec.students = *gen_students;
      if (gen_seed) spec.seed = *gen_seed;
      if (gen_noise) spec.noise = *gen_noise;
      if (gen_discrimination) spec.discrimination = *gen_discrimination;
      if (gen_exact) {
        spec.exact_target = true;
        spec.noise = 0.0;
        spec.exams.resize(1);
      }
      try {
        spec.validate();
      } catch (const ContractError& e) {
        throw UsageError(e.what());
      }
      write_files(serialize_gradebook(generate_synthetic(spec)), gen_out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace examweight::cli
