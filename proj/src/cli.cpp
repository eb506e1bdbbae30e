#include "hmf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hmf/config.hpp"
#include "hmf/error.hpp"
#include "hmf/eval.hpp"
#include "hmf/matrix_io.hpp"
#include "hmf/preprocess.hpp"
#include "hmf/simd.hpp"
#include "json.hpp"

namespace hmf {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kManifestVersion = 1;

unsigned env_threads() {
  const char* v = std::getenv("HMF_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("HMF_THREADS must be a positive integer, got '" + std::string(v) + "'");
  return static_cast<unsigned>(n);
}

std::string factor_file(const std::string& entity) { return "F_" + entity + ".csv"; }

std::string private_file(const DatasetSpec& d) {
  return (d.kind == DatasetKind::feature ? "G_" : "S_") + d.name + ".csv";
}

std::size_t dataset_or_throw(const HmfModel& m, const std::string& name) {
  const std::size_t n = m.dataset_index(name);
  if (n == kNoEntity) throw ConfigError("no dataset named '" + name + "'");
  return n;
}

void require_valid(const HmfModel& m) {
  const auto v = validate(m);
  if (v.empty()) return;
  throw ConfigError(v.front().path + ": " + v.front().rule + ": " + v.front().message +
                    (v.size() > 1 ? " (and " + std::to_string(v.size() - 1) + " more)" : ""));
}

json number_array(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(x);
  return a;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

int cmd_validate(const std::string& config, std::ostream& out) {
  const RunConfig rc = load_config(config);
  const auto violations = validate(rc.model);
  for (const auto& v : violations) out << v.path << ": " << v.rule << ": " << v.message << "\n";
  if (violations.empty()) {
    out << "ok\n";
    return 0;
  }
  return 2;
}

int cmd_train(const std::string& config, const std::string& out_dir, unsigned threads,
              std::ostream& out) {
  RunConfig rc = load_config(config);
  require_valid(rc.model);
  Diagnostics diag;
  const PosteriorSummary s = fit(rc.model, rc.init, rc.draw_mode, GibbsOptions{threads, true}, &diag);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  json files = json::object();
  for (std::size_t t = 0; t < rc.model.entity_types.size(); ++t) {
    const std::string f = factor_file(rc.model.entity_types[t].name);
    save_matrix((dir / f).string(), s.entity_means[t]);
    files[rc.model.entity_types[t].name] = f;
  }
  for (std::size_t n = 0; n < rc.model.datasets.size(); ++n) {
    const std::string f = private_file(rc.model.datasets[n]);
    save_matrix((dir / f).string(), s.private_means[n]);
    files[rc.model.datasets[n].name] = f;
  }

  json lambdas = json::object(), noise = json::object();
  for (std::size_t t = 0; t < rc.model.entity_types.size(); ++t)
    lambdas[rc.model.entity_types[t].name] = vector_json(s.lambda_means[t]);
  for (std::size_t n = 0; n < rc.model.datasets.size(); ++n)
    noise[rc.model.datasets[n].name] = s.noise_means[n];
  const json diagnostics = {{"log_joint", number_array(diag.log_joint)},
                            {"clamp_events", diag.clamp_events},
                            {"prior_fallbacks", diag.prior_fallbacks},
                            {"lambda_means", lambdas},
                            {"noise_means", noise}};
  write_file((dir / "diagnostics.json").string(), diagnostics.dump(2) + "\n");

  const json manifest = {{"manifest_version", kManifestVersion},
                         {"config", rc.resolved},
                         {"seed", rc.model.schedule.seed},
                         {"retained_draws", s.retained_draws},
                         {"threads", threads},
                         {"files", files}};
  write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  out << "retained " << s.retained_draws << " draws; wrote " << out_dir << "\n";
  return 0;
}

std::vector<Cell> load_cells(const std::string& path) {
  const ObservedMatrix m = load_matrix(path);
  if (m.cols() != 2) throw DataError(path + ": expected two columns (row,col)");
  std::vector<Cell> cells;
  for (Index i = 0; i < m.rows(); ++i) {
    const double r = m.values(i, 0), c = m.values(i, 1);
    if (!m.observed(i, 0) || !m.observed(i, 1) || r != std::floor(r) || c != std::floor(c))
      throw DataError(path + ": line " + std::to_string(i + 1) + ": row and col must be integers");
    cells.push_back({static_cast<Index>(r), static_cast<Index>(c)});
  }
  return cells;
}

int cmd_predict(const std::string& run_dir, const std::string& dataset, const std::string& cells_path,
                const std::string& out_path, std::ostream& out) {
  const fs::path dir(run_dir);
  const RunConfig rc = load_config((dir / "manifest.json").string());
  const HmfModel& m = rc.model;
  const std::size_t n = dataset_or_throw(m, dataset);

  PosteriorSummary s;
  for (const auto& e : m.entity_types) s.entity_means.push_back(load_matrix((dir / factor_file(e.name)).string()).values);
  for (const auto& d : m.datasets) s.private_means.push_back(load_matrix((dir / private_file(d)).string()).values);

  const std::vector<Cell> cells = cells_path.empty() ? unobserved_cells(m.datasets[n].data) : load_cells(cells_path);
  const std::vector<double> pred = predict(m, s, n, cells);
  std::string csv = "row,col,prediction\n";
  for (std::size_t i = 0; i < cells.size(); ++i)
    csv += std::to_string(cells[i].row) + "," + std::to_string(cells[i].col) + "," + format_double(pred[i]) + "\n";
  if (out_path.empty()) out << csv;
  else write_file(out_path, csv);
  return 0;
}

int cmd_cv(const std::string& config, const std::string& dataset, const std::string& mode,
           std::size_t folds, std::uint64_t seed, const std::string& out_dir, unsigned threads,
           std::ostream& out) {
  const RunConfig rc = load_config(config);
  require_valid(rc.model);
  const std::size_t n = dataset_or_throw(rc.model, dataset);
  const FoldMode fm = mode == "in" ? FoldMode::in_matrix : FoldMode::out_of_matrix;
  const FoldPlan plan = make_folds(rc.model.datasets[n], fm, folds, seed);
  const ExperimentResult r = cross_validate(rc.model, n, plan, EvalOptions{rc.init, rc.draw_mode, threads});
  const json j = {{"dataset", dataset},    {"mode", mode},
                  {"folds", folds},        {"seed", seed},
                  {"fold_mse", number_array(r.fold_mse)}, {"mean_mse", r.mean_mse}};
  if (out_dir.empty()) {
    out << j.dump(2) << "\n";
    return 0;
  }
  fs::create_directories(out_dir);
  write_file((fs::path(out_dir) / "cv.json").string(), j.dump(2) + "\n");
  std::string csv = "fold,mse\n";
  for (std::size_t f = 0; f < r.fold_mse.size(); ++f)
    csv += std::to_string(f) + "," + format_double(r.fold_mse[f]) + "\n";
  write_file((fs::path(out_dir) / "cv_folds.csv").string(), csv);
  out << "mean_mse " << format_double(r.mean_mse) << "\n";
  return 0;
}

std::vector<double> parse_fractions(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad fraction '" + tok + "'");
    }
  }
  return out;
}

int cmd_sparsity(const std::string& config, const std::string& dataset, const std::string& fractions,
                 std::size_t repeats, const std::string& out_path, unsigned threads, std::ostream& out) {
  const RunConfig rc = load_config(config);
  require_valid(rc.model);
  const std::size_t n = dataset_or_throw(rc.model, dataset);
  const ExperimentResult r = sparsity_experiment(rc.model, n, parse_fractions(fractions), repeats,
                                                 EvalOptions{rc.init, rc.draw_mode, threads});
  std::string csv = "fraction,mean_mse,sd\n";
  for (const auto& p : r.series)
    csv += format_double(p.fraction) + "," + format_double(p.mean_mse) + "," + format_double(p.sd) + "\n";
  if (out_path.empty()) out << csv;
  else write_file(out_path, csv);
  return 0;
}

int cmd_kernel(const std::string& type, const std::string& in, const std::string& out_path,
               double sigma2, bool mask_diagonal) {
  const ObservedMatrix m = load_matrix(in);
  KernelMatrix k = type == "jaccard" ? jaccard_kernel(m) : gaussian_kernel(m, sigma2);
  if (mask_diagonal)
    for (Index i = 0; i < k.rows(); ++i) k.mask(i, i) = 0;
  save_matrix(out_path, k);
  return 0;
}

int cmd_preprocess(const std::string& op, const std::string& in, const std::string& out_path,
                   double ceiling, bool transpose, std::ostream& err) {
  ObservedMatrix m = load_matrix(in);
  if (transpose) m = ObservedMatrix(m.values.transpose(), m.mask.transpose());
  if (op == "cap") {
    if (!std::isfinite(ceiling)) throw ConfigError("cap needs --ceiling");
    m = cap(m, ceiling);
  } else if (op == "rescale-rows") {
    m = rescale_rows_unit(m);
  } else {
    Standardised s = standardise_columns(m);
    for (const auto& w : s.warnings) err << "warning: " << w << "\n";
    m = std::move(s.matrix);
  }
  if (transpose) m = ObservedMatrix(m.values.transpose(), m.mask.transpose());
  save_matrix(out_path, m);
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian hybrid matrix factorisation", "hmf"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  unsigned threads = 0;
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads (default HMF_THREADS or 1)")->check(CLI::PositiveNumber);
  };

  std::string config, out_path, dataset, mode = "in", run_dir, cells, fractions, type, in, op;
  std::size_t folds = 10, repeats = 20;
  std::uint64_t seed = 0;
  double sigma2 = 0.0, ceiling = std::nan("");
  bool transpose = false, mask_diagonal = false;

  auto* train = app.add_subcommand("train", "Run the sampler and write posterior means");
  train->add_option("--config", config)->required();
  train->add_option("--out", out_path)->required();
  add_threads(train);

  auto* pred = app.add_subcommand("predict", "Predict cells from a trained run");
  pred->add_option("--run", run_dir)->required();
  pred->add_option("--dataset", dataset)->required();
  pred->add_option("--cells", cells, "CSV of row,col (default: every unobserved cell)");
  pred->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* cv = app.add_subcommand("cv", "Cross-validation");
  cv->add_option("--config", config)->required();
  cv->add_option("--dataset", dataset)->required();
  cv->add_option("--mode", mode)->check(CLI::IsMember({"in", "out"}));
  cv->add_option("--folds", folds)->check(CLI::PositiveNumber);
  cv->add_option("--seed", seed);
  cv->add_option("--out", out_path, "Directory for cv.json and cv_folds.csv (default stdout)");
  add_threads(cv);

  auto* sp = app.add_subcommand("sparsity", "Test error against the fraction of missing entries");
  sp->add_option("--config", config)->required();
  sp->add_option("--dataset", dataset)->required();
  sp->add_option("--fractions", fractions)->required();
  sp->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
  sp->add_option("--out", out_path, "Output CSV (default stdout)");
  add_threads(sp);

  auto* ker = app.add_subcommand("kernel", "Build a similarity kernel from row vectors");
  ker->add_option("--type", type)->required()->check(CLI::IsMember({"jaccard", "gaussian"}));
  ker->add_option("--in", in)->required();
  ker->add_option("--out", out_path)->required();
  ker->add_option("--sigma2", sigma2, "Gaussian variance (default: number of features)");
  ker->add_flag("--mask-diagonal", mask_diagonal, "Write the diagonal as missing");

  auto* pre = app.add_subcommand("preprocess", "Cap, rescale or standardise a matrix");
  pre->add_option("--op", op)->required()->check(CLI::IsMember({"cap", "rescale-rows", "standardise"}));
  pre->add_option("--in", in)->required();
  pre->add_option("--out", out_path)->required();
  pre->add_option("--ceiling", ceiling);
  pre->add_flag("--transpose", transpose, "Operate on the transpose");

  auto* val = app.add_subcommand("validate", "Check a config against the model rules");
  val->add_option("--config", config)->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error:usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (threads == 0) threads = env_threads();
    if (*train) return cmd_train(config, out_path, threads, out);
    if (*pred) return cmd_predict(run_dir, dataset, cells, out_path, out);
    if (*cv) return cmd_cv(config, dataset, mode, folds, seed, out_path, threads, out);
    if (*sp) return cmd_sparsity(config, dataset, fractions, repeats, out_path, threads, out);
    if (*ker) return cmd_kernel(type, in, out_path, sigma2, mask_diagonal);
    if (*pre) return cmd_preprocess(op, in, out_path, ceiling, transpose, err);
    if (*val) return cmd_validate(config, out);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error:" << e.category() << ": " << msg << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error:data: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error:internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hmf
