#include "agginc/cli.hpp"

#include "agginc/csv.hpp"
#include "agginc/error.hpp"
#include "agginc/harness.hpp"
#include "agginc/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace agginc {

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;

std::uint64_t default_seed() {
  const char* env = std::getenv("AGGINC_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(env, &used);
    if (used == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("AGGINC_SEED must be a non-negative integer");
}

struct CommonFlags {
  double alpha = 0.05;
  std::size_t B1 = 500;
  std::size_t B2 = 500;
  std::size_t B3 = 50;
  std::string collection = "median";
  std::string kernel;
  double imq_exponent = 0.5;
  std::optional<std::uint64_t> seed;

  TestConfig config() const { return {alpha, B1, B2, B3}; }

  CollectionKind collection_kind() const {
    if (collection == "median") return CollectionKind::Median;
    if (collection == "theoretical") return CollectionKind::Theoretical;
    throw ConfigError("collection must be 'median' or 'theoretical'");
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--alpha", f.alpha, "Test level")->capture_default_str();
  cmd->add_option("--B1", f.B1, "Bootstrap replicates for the quantiles")->capture_default_str();
  cmd->add_option("--B2", f.B2, "Bootstrap replicates for the level correction")->capture_default_str();
  cmd->add_option("--B3", f.B3, "Bisection steps for the level correction")->capture_default_str();
  cmd->add_option("--collection", f.collection, "Bandwidth collection: median | theoretical")->capture_default_str();
  cmd->add_option("--kernel", f.kernel, "Kernel family: gaussian | imq");
  cmd->add_option("--imq-exponent", f.imq_exponent, "IMQ exponent beta in (0, 1)")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed (default: $AGGINC_SEED or 0)");
}

struct DesignFlags {
  std::size_t R = 100;
  bool full = false;
  std::optional<std::size_t> random_L;

  DesignRequest request() const {
    DesignRequest r;
    if (full) {
      r.kind = DesignKind::Full;
    } else if (random_L) {
      r.kind = DesignKind::RandomNoReplacement;
      r.size = *random_L;
    } else {
      r.kind = DesignKind::SubDiagonal;
      r.subdiagonals = R;
    }
    return r;
  }
};

void add_design(CLI::App* cmd, DesignFlags& f) {
  auto* r = cmd->add_option("--R", f.R, "Number of sub-diagonals of the design")->capture_default_str();
  auto* full = cmd->add_flag("--full", f.full, "Use every pair (complete U-statistic)");
  auto* random = cmd->add_option("--random-L", f.random_L, "Random design of L pairs without replacement");
  r->excludes(full)->excludes(random);
  full->excludes(random);
}

AggOptions make_options(const CommonFlags& common, const DesignFlags& design, KernelFamily default_family) {
  AggOptions options;
  options.config = common.config();
  options.config.validate();
  options.design = design.request();
  options.collection = common.collection_kind();
  options.family = common.kernel.empty() ? default_family : parse_kernel_family(common.kernel);
  options.imq_exponent = common.imq_exponent;
  options.seed = common.seed ? *common.seed : default_seed();
  return options;
}

void report(const AggTestResult& result, const AggOptions& options, std::ostream& out, std::ostream& err) {
  out << to_json(result).dump(2) << '\n';
  err << describe(result) << '\n';
  std::vector<double> weights;
  for (const auto& o : result.per_bandwidth) weights.push_back(o.weight);
  for (const auto& notice : bootstrap_bound_notices(options.config, weights)) err << "note: " << notice << '\n';
}

nlohmann::json load_json_arg(const std::string& arg) {
  std::string text = arg;
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || arg[first] != '{') {
    std::ifstream in(arg);
    if (!in) throw InputError("cannot open model parameter file '" + arg + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model parameters are not valid JSON: ") + e.what());
  }
}

ScoreModel load_model(const std::string& name, const std::string& params, std::size_t dimension) {
  if (name == "gaussian") {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
    if (!params.empty()) {
      const auto j = load_json_arg(params);
      if (j.contains("mean")) {
        std::vector<double> m;
        try {
          m = j.at("mean").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(std::string("invalid Gaussian model mean: ") + e.what());
        }
        if (m.size() != dimension) throw InputError("Gaussian model mean does not match the data dimension");
        mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
      }
    }
    return gaussian_score_model(std::move(mean));
  }
  if (name == "gbrbm") {
    if (params.empty()) throw ConfigError("the gbrbm model needs --model-params");
    const GbrbmSpec spec = gbrbm_from_json(load_json_arg(params));
    if (spec.dx() != dimension) throw InputError("GBRBM visible dimension does not match the data dimension");
    return gbrbm_score_model(spec);
  }
  throw ConfigError("unknown model '" + name + "' (expected gaussian or gbrbm)");
}

std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> values;
  for (const auto& s : raw) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError("sweep value '" + s + "' is not a number");
    values.push_back(v);
  }
  return values;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aggregated kernel tests with incomplete U-statistics", "agginc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "agginc 0.1.0");

  // Test subcommands.
  CommonFlags mmd_common, hsic_common, ksd_common;
  DesignFlags mmd_design, hsic_design, ksd_design;
  std::string mmd_x, mmd_y;
  auto* mmd = app.add_subcommand("mmdagginc", "Two-sample test of X.csv against Y.csv");
  mmd->add_option("X", mmd_x, "First sample (CSV)")->required();
  mmd->add_option("Y", mmd_y, "Second sample (CSV)")->required();
  add_common(mmd, mmd_common);
  add_design(mmd, mmd_design);

  std::vector<std::string> hsic_files;
  std::optional<std::size_t> hsic_dx;
  auto* hsic = app.add_subcommand("hsicagginc", "Independence test of paired rows of X.csv and Y.csv");
  hsic->add_option("files", hsic_files, "X.csv Y.csv, or a single joint Z.csv with --dx")->required()->expected(1, 2);
  hsic->add_option("--dx", hsic_dx, "Columns of Z belonging to X (single-file input)");
  add_common(hsic, hsic_common);
  add_design(hsic, hsic_design);

  std::string ksd_z, ksd_model = "gaussian", ksd_params;
  auto* ksd = app.add_subcommand("ksdagginc", "Goodness-of-fit test of Z.csv against a score model");
  ksd->add_option("Z", ksd_z, "Sample (CSV)")->required();
  ksd->add_option("--model", ksd_model, "Score model: gaussian | gbrbm")->capture_default_str();
  ksd->add_option("--model-params", ksd_params, "Model parameters: JSON file or inline JSON object");
  add_common(ksd, ksd_common);
  add_design(ksd, ksd_design);

  // Experiments.
  CommonFlags exp_common;
  std::string exp_problem = "two_sample", exp_sweep = "sample_size";
  std::vector<std::string> exp_values_raw;
  std::vector<std::size_t> exp_R;
  bool exp_full = false;
  std::vector<std::size_t> exp_random_L;
  ExperimentPlan base;
  std::string exp_difficulty = "2";
  std::string out_csv, out_json, out_svg, title;
  auto* exp = app.add_subcommand("experiment", "Level / power / runtime sweep on synthetic data");
  exp->add_option("--problem", exp_problem, "two_sample | independence | goodness_of_fit")->capture_default_str();
  exp->add_option("--sweep", exp_sweep, "sample_size | dimension | difficulty | R")->capture_default_str();
  exp->add_option("--values", exp_values_raw, "Sweep values")->required()->delimiter(',');
  exp->add_option("--reps", base.repetitions, "Repetitions per sweep value")->capture_default_str();
  exp->add_option("--jobs", base.jobs, "Concurrent repetitions")->capture_default_str();
  exp->add_option("--R", exp_R, "Sub-diagonal design(s); one configuration per value")->delimiter(',');
  exp->add_flag("--full", exp_full, "Add a full-design configuration");
  exp->add_option("--random-L", exp_random_L, "Random design configuration(s) of L pairs")->delimiter(',');
  exp->add_option("--N", base.sample_size, "Sample size")->capture_default_str();
  exp->add_option("--d", base.d, "Dimension (two-sample)")->capture_default_str();
  exp->add_option("--dx", base.dx, "X dimension (independence, GBRBM visible units)")->capture_default_str();
  exp->add_option("--dy", base.dy, "Y dimension (independence)")->capture_default_str();
  exp->add_option("--dh", base.dh, "GBRBM hidden units")->capture_default_str();
  exp->add_option("--P", base.perturbations, "Perturbations per axis")->capture_default_str();
  exp->add_option("--difficulty", exp_difficulty, "S (inf for the null) or GBRBM noise sigma (0 for the null)")
      ->capture_default_str();
  exp->add_option("--burn-in", base.gibbs.burn_in, "Gibbs burn-in sweeps")->capture_default_str();
  exp->add_option("--thinning", base.gibbs.thinning, "Gibbs thinning")->capture_default_str();
  exp->add_option("--out-csv", out_csv, "Result table CSV");
  exp->add_option("--out-json", out_json, "Result JSON with provenance");
  exp->add_option("--out-svg", out_svg, "Rejection-rate chart");
  exp->add_option("--title", title, "Chart title");
  add_common(exp, exp_common);

  // Synthetic data export.
  std::string gen_problem = "two_sample", gen_difficulty = "2", gen_x, gen_y, gen_model;
  ExperimentPlan gen_plan;
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("generate", "Write one synthetic dataset (and model) to files");
  gen->add_option("--problem", gen_problem, "two_sample | independence | goodness_of_fit")->capture_default_str();
  gen->add_option("--N", gen_plan.sample_size, "Sample size")->capture_default_str();
  gen->add_option("--d", gen_plan.d, "Dimension (two-sample)")->capture_default_str();
  gen->add_option("--dx", gen_plan.dx, "X dimension / GBRBM visible units")->capture_default_str();
  gen->add_option("--dy", gen_plan.dy, "Y dimension")->capture_default_str();
  gen->add_option("--dh", gen_plan.dh, "GBRBM hidden units")->capture_default_str();
  gen->add_option("--P", gen_plan.perturbations, "Perturbations per axis")->capture_default_str();
  gen->add_option("--difficulty", gen_difficulty, "S or sigma")->capture_default_str();
  gen->add_option("--burn-in", gen_plan.gibbs.burn_in, "Gibbs burn-in sweeps")->capture_default_str();
  gen->add_option("--thinning", gen_plan.gibbs.thinning, "Gibbs thinning")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Seed (default: $AGGINC_SEED or 0)");
  gen->add_option("--out-x", gen_x, "Output CSV for X (or Z)")->required();
  gen->add_option("--out-y", gen_y, "Output CSV for Y");
  gen->add_option("--out-model", gen_model, "Output JSON for the GBRBM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (mmd->parsed()) {
      const AggOptions options = make_options(mmd_common, mmd_design, KernelFamily::Gaussian);
      const SampleMatrix x = read_sample_csv_file(mmd_x);
      const SampleMatrix y = read_sample_csv_file(mmd_y);
      if (x.rows() != y.rows()) {
        err << "warning: sample sizes differ (" << x.rows() << " vs " << y.rows() << "); using the first "
            << std::min(x.rows(), y.rows()) << " rows of each\n";
      }
      report(mmdagginc(x, y, options), options, out, err);
    } else if (hsic->parsed()) {
      const AggOptions options = make_options(hsic_common, hsic_design, KernelFamily::Gaussian);
      SampleMatrix x, y;
      if (hsic_files.size() == 2) {
        if (hsic_dx) throw ConfigError("--dx applies to single-file input only");
        x = read_sample_csv_file(hsic_files[0]);
        y = read_sample_csv_file(hsic_files[1]);
      } else {
        if (!hsic_dx) throw ConfigError("single-file input needs --dx");
        const SampleMatrix z = read_sample_csv_file(hsic_files[0]);
        const auto dx = static_cast<Eigen::Index>(*hsic_dx);
        if (dx < 1 || dx >= z.cols()) throw InputError("--dx must leave at least one column for each of X and Y");
        x = z.leftCols(dx);
        y = z.rightCols(z.cols() - dx);
      }
      if (x.rows() % 2 == 1) err << "warning: odd sample size; the last row is unused\n";
      report(hsicagginc(x, y, options), options, out, err);
    } else if (ksd->parsed()) {
      const AggOptions options = make_options(ksd_common, ksd_design, KernelFamily::Imq);
      const SampleMatrix z = read_sample_csv_file(ksd_z);
      const ScoreModel model = load_model(ksd_model, ksd_params, static_cast<std::size_t>(z.cols()));
      report(ksdagginc(z, model, options), options, out, err);
    } else if (exp->parsed()) {
      base.problem = parse_problem(exp_problem);
      base.sweep = parse_sweep_variable(exp_sweep);
      base.values = parse_values(exp_values_raw);
      base.difficulty = parse_values({exp_difficulty}).front();
      base.config = exp_common.config();
      base.collection = exp_common.collection_kind();
      if (!exp_common.kernel.empty()) base.family = parse_kernel_family(exp_common.kernel);
      base.master_seed = exp_common.seed ? *exp_common.seed : default_seed();

      std::vector<ExperimentPlan> plans;
      if (base.sweep == SweepVariable::Subdiagonals) {
        if (!exp_R.empty() || exp_full || !exp_random_L.empty()) {
          throw ConfigError("design flags cannot be combined with an R sweep");
        }
        plans.push_back(base);
      } else {
        for (std::size_t r : exp_R) {
          ExperimentPlan p = base;
          p.design = {DesignKind::SubDiagonal, r, 0};
          plans.push_back(p);
        }
        for (std::size_t l : exp_random_L) {
          ExperimentPlan p = base;
          p.design = {DesignKind::RandomNoReplacement, 0, l};
          plans.push_back(p);
        }
        if (exp_full) {
          ExperimentPlan p = base;
          p.design = {DesignKind::Full, 0, 0};
          plans.push_back(p);
        }
        if (plans.empty()) plans.push_back(base);
      }
      for (const auto& p : plans) p.validate();

      std::vector<ResultTable> tables;
      for (const auto& p : plans) {
        tables.push_back(run_experiment(p));
        const auto& t = tables.back();
        for (const auto& row : t.rows) {
          err << t.label << "  " << to_string(t.sweep) << "=" << row.sweep_value << "  rejection rate "
              << row.rejection_rate << "  mean runtime " << row.mean_runtime_seconds << " s  L=" << row.l_used
              << '\n';
        }
      }
      const nlohmann::json j = experiment_json(plans, tables);
      out << j.dump(2) << '\n';
      if (!out_csv.empty()) write_file(out_csv, [&](std::ostream& s) { write_tables_csv(tables, s); });
      if (!out_json.empty()) write_file(out_json, [&](std::ostream& s) { s << j.dump(2) << '\n'; });
      if (!out_svg.empty()) write_file(out_svg, [&](std::ostream& s) { write_svg(tables, s, title); });
    } else if (gen->parsed()) {
      gen_plan.problem = parse_problem(gen_problem);
      gen_plan.values = {parse_values({gen_difficulty}).front()};
      gen_plan.sweep = SweepVariable::Difficulty;
      gen_plan.repetitions = 1;
      gen_plan.validate();
      const std::uint64_t seed = gen_seed ? *gen_seed : default_seed();
      const ExperimentData data = generate_data(gen_plan, gen_plan.values.front(), seed);
      write_file(gen_x, [&](std::ostream& s) { write_sample_csv(data.x, s); });
      if (gen_plan.problem != Problem::GoodnessOfFit) {
        if (gen_y.empty()) throw ConfigError("--out-y is required for this problem");
        write_file(gen_y, [&](std::ostream& s) { write_sample_csv(data.y, s); });
      } else if (!gen_model.empty()) {
        write_file(gen_model, [&](std::ostream& s) { s << to_json(*data.model).dump(2) << '\n'; });
      }
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}

}  // namespace agginc
