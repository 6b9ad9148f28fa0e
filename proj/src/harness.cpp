#include "agginc/harness.hpp"

#include "agginc/csv.hpp"
#include "agginc/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace agginc {

namespace {

constexpr const char* kVersion = "agginc 0.1.0";

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw ConfigError(std::string(what) + " sweep values must be positive integers");
  }
  return static_cast<std::size_t>(v);
}

// Plan with the swept variable set to `value`.
ExperimentPlan apply_sweep(const ExperimentPlan& plan, double value) {
  ExperimentPlan p = plan;
  switch (plan.sweep) {
    case SweepVariable::SampleSize:
      p.sample_size = as_count(value, "sample size");
      break;
    case SweepVariable::Dimension:
      if (plan.problem == Problem::TwoSample) p.d = as_count(value, "dimension");
      if (plan.problem == Problem::Independence) p.dy = as_count(value, "dimension");
      if (plan.problem == Problem::GoodnessOfFit) p.dh = as_count(value, "dimension");
      break;
    case SweepVariable::Difficulty:
      p.difficulty = value;
      break;
    case SweepVariable::Subdiagonals:
      p.design.kind = DesignKind::SubDiagonal;
      p.design.subdiagonals = as_count(value, "R");
      break;
  }
  return p;
}

KernelFamily plan_family(const ExperimentPlan& plan) {
  if (plan.family) return *plan.family;
  return plan.problem == Problem::GoodnessOfFit ? KernelFamily::Imq : KernelFamily::Gaussian;
}

std::string sanitize_label(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double_cell(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("result CSV: '" + s + "' is not a number");
  }
  if (used != s.size()) throw InputError("result CSV: '" + s + "' is not a number");
  return v;
}

std::uint64_t parse_u64_cell(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw InputError("result CSV: '" + s + "' is not an integer");
  }
  if (used != s.size()) throw InputError("result CSV: '" + s + "' is not an integer");
  return v;
}

}  // namespace

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::SampleSize:
      return "sample_size";
    case SweepVariable::Dimension:
      return "dimension";
    case SweepVariable::Difficulty:
      return "difficulty";
    case SweepVariable::Subdiagonals:
      return "R";
  }
  return "unknown";
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "sample_size" || name == "N") return SweepVariable::SampleSize;
  if (name == "dimension" || name == "d") return SweepVariable::Dimension;
  if (name == "difficulty" || name == "S" || name == "sigma") return SweepVariable::Difficulty;
  if (name == "R" || name == "subdiagonals") return SweepVariable::Subdiagonals;
  throw ConfigError("unknown sweep variable '" + name + "'");
}

void ExperimentPlan::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (values.empty()) throw ConfigError("sweep values must be non-empty");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  config.validate();
  for (double v : values) {
    const ExperimentPlan p = apply_sweep(*this, v);
    if (p.problem == Problem::GoodnessOfFit) {
      if (!(p.difficulty >= 0.0)) throw ConfigError("GBRBM noise sigma must be >= 0");
    } else if (!(p.difficulty >= 1.0)) {
      throw ConfigError("inverse scaling S must be >= 1 (inf for the null)");
    }
    if (p.sample_size < 4) throw ConfigError("sample size must be >= 4");
  }
}

ExperimentData generate_data(const ExperimentPlan& base, double sweep_value, std::uint64_t seed) {
  const ExperimentPlan plan = apply_sweep(base, sweep_value);
  ExperimentData data;
  switch (plan.problem) {
    case Problem::TwoSample: {
      Rng rng_x = make_rng(seed, streams::kDataX);
      Rng rng_y = make_rng(seed, streams::kDataY);
      data.x = sample_uniform(plan.sample_size, plan.d, rng_x);
      const auto spec = make_perturbed_uniform(plan.d, plan.perturbations, plan.difficulty, rng_y);
      data.y = sample_perturbed_uniform(spec, plan.sample_size, rng_y);
      break;
    }
    case Problem::Independence: {
      Rng rng = make_rng(seed, streams::kDataX);
      const auto spec = make_perturbed_uniform(plan.dx + plan.dy, plan.perturbations, plan.difficulty, rng);
      const SampleMatrix z = sample_independence_pair(spec, plan.dx, plan.dy, plan.sample_size, rng);
      data.x = z.leftCols(static_cast<Eigen::Index>(plan.dx));
      data.y = z.rightCols(static_cast<Eigen::Index>(plan.dy));
      break;
    }
    case Problem::GoodnessOfFit: {
      Rng rng_model = make_rng(seed, streams::kModel);
      Rng rng_data = make_rng(seed, streams::kDataX);
      GbrbmSpec model = make_gbrbm(plan.dx, plan.dh, rng_model);
      const GbrbmSpec source = with_weight_noise(model, plan.difficulty, rng_model);
      data.x = gbrbm_sample(source, plan.sample_size, rng_data, plan.gibbs);
      data.model = std::move(model);
      break;
    }
  }
  return data;
}

RepetitionOutcome run_repetition(const ExperimentPlan& base, double sweep_value, std::uint64_t seed) {
  const ExperimentPlan plan = apply_sweep(base, sweep_value);
  const ExperimentData data = generate_data(base, sweep_value, seed);
  AggOptions options;
  options.config = plan.config;
  options.design = plan.design;
  options.collection = plan.collection;
  options.family = plan_family(plan);
  options.seed = seed;

  using Clock = std::chrono::steady_clock;
  RepetitionOutcome out;
  auto timed = [&](auto&& run) {
    const auto start = Clock::now();
    const AggTestResult r = run();
    out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    out.reject = r.reject;
    out.l_used = r.l_used;
  };

  switch (plan.problem) {
    case Problem::TwoSample:
      timed([&] { return mmdagginc(data.x, data.y, options); });
      break;
    case Problem::Independence:
      timed([&] { return hsicagginc(data.x, data.y, options); });
      break;
    case Problem::GoodnessOfFit: {
      const ScoreModel score = gbrbm_score_model(*data.model);
      timed([&] { return ksdagginc(data.x, score, options); });
      break;
    }
  }
  return out;
}

ResultTable run_experiment(const ExperimentPlan& plan, std::string label) {
  plan.validate();
  ResultTable table;
  table.label = label.empty() ? default_label(plan) : std::move(label);
  table.sweep = plan.sweep;

  for (double value : plan.values) {
    std::vector<RepetitionOutcome> outcomes(plan.repetitions);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t rep = next.fetch_add(1);
        if (rep >= plan.repetitions) return;
        try {
          outcomes[rep] = run_repetition(plan, value, repetition_seed(plan.master_seed, rep));
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) {
            std::ostringstream msg;
            msg << "repetition " << rep << " at " << to_string(plan.sweep) << "=" << value << ": " << e.what();
            try {
              throw;
            } catch (const ConfigError&) {
              failure = std::make_exception_ptr(ConfigError(msg.str()));
            } catch (const InputError&) {
              failure = std::make_exception_ptr(InputError(msg.str()));
            } catch (...) {
              failure = std::make_exception_ptr(std::runtime_error(msg.str()));
            }
          }
          next.store(plan.repetitions);
          return;
        }
      }
    };
    const std::size_t threads = std::min(plan.jobs, plan.repetitions);
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    ResultRow row;
    row.sweep_value = value;
    row.master_seed = plan.master_seed;
    row.repetitions = plan.repetitions;
    row.l_used = outcomes.front().l_used;
    std::size_t rejections = 0;
    double seconds = 0.0;
    for (const auto& o : outcomes) {
      row.decisions.push_back(o.reject);
      rejections += o.reject ? 1 : 0;
      seconds += o.seconds;
    }
    row.rejection_rate = static_cast<double>(rejections) / static_cast<double>(plan.repetitions);
    row.mean_runtime_seconds = seconds / static_cast<double>(plan.repetitions);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string default_label(const ExperimentPlan& plan) {
  std::string name;
  switch (plan.problem) {
    case Problem::TwoSample:
      name = "MMDAgg";
      break;
    case Problem::Independence:
      name = "HSICAgg";
      break;
    case Problem::GoodnessOfFit:
      name = "KSDAgg";
      break;
  }
  switch (plan.design.kind) {
    case DesignKind::SubDiagonal:
      return plan.sweep == SweepVariable::Subdiagonals ? name + "Inc"
                                                       : name + "Inc R=" + std::to_string(plan.design.subdiagonals);
    case DesignKind::RandomNoReplacement:
      return name + "Inc L=" + std::to_string(plan.design.size);
    case DesignKind::Full:
      return name + "Com";
    case DesignKind::Explicit:
      break;
  }
  return name;
}

void write_tables_csv(std::span<const ResultTable> tables, std::ostream& out) {
  out << "label,sweep_variable,sweep_value,rejection_rate,mean_runtime_seconds,l_used,master_seed,repetitions,"
         "decisions\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      out << sanitize_label(t.label) << ',' << to_string(t.sweep) << ',' << format_double(r.sweep_value) << ','
          << format_double(r.rejection_rate) << ',' << format_double(r.mean_runtime_seconds) << ',' << r.l_used
          << ',' << r.master_seed << ',' << r.repetitions << ',';
      for (bool d : r.decisions) out << (d ? '1' : '0');
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing result CSV");
}

std::vector<ResultTable> read_tables_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("result CSV is empty");
  const auto header = split(line, ',');
  if (header.size() != 9 || header[0] != "label") throw InputError("result CSV has an unexpected header");

  std::vector<ResultTable> tables;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 9) throw InputError("result CSV row has " + std::to_string(cells.size()) + " columns");
    const SweepVariable sweep = parse_sweep_variable(cells[1]);
    if (tables.empty() || tables.back().label != cells[0] || tables.back().sweep != sweep) {
      tables.push_back({cells[0], sweep, {}});
    }
    ResultRow r;
    r.sweep_value = parse_double_cell(cells[2]);
    r.rejection_rate = parse_double_cell(cells[3]);
    r.mean_runtime_seconds = parse_double_cell(cells[4]);
    r.l_used = static_cast<std::size_t>(parse_u64_cell(cells[5]));
    r.master_seed = parse_u64_cell(cells[6]);
    r.repetitions = static_cast<std::size_t>(parse_u64_cell(cells[7]));
    for (char c : cells[8]) {
      if (c != '0' && c != '1') throw InputError("result CSV decisions must be a 0/1 string");
      r.decisions.push_back(c == '1');
    }
    tables.back().rows.push_back(std::move(r));
  }
  return tables;
}

nlohmann::json to_json(const ExperimentPlan& plan) {
  nlohmann::json j;
  j["problem"] = to_string(plan.problem);
  j["sweep"] = to_string(plan.sweep);
  j["values"] = plan.values;
  j["repetitions"] = plan.repetitions;
  j["master_seed"] = plan.master_seed;
  j["design"] = {{"kind", to_string(plan.design.kind)},
                 {"subdiagonals", plan.design.subdiagonals},
                 {"size", plan.design.size}};
  j["config"] = {{"alpha", plan.config.alpha},
                 {"B1", plan.config.B1},
                 {"B2", plan.config.B2},
                 {"B3", plan.config.B3}};
  j["collection"] = plan.collection == CollectionKind::Median ? "median" : "theoretical";
  j["kernel"] = to_string(plan_family(plan));
  j["sample_size"] = plan.sample_size;
  j["d"] = plan.d;
  j["dx"] = plan.dx;
  j["dy"] = plan.dy;
  j["dh"] = plan.dh;
  j["perturbations"] = plan.perturbations;
  // JSON has no infinity; the null of the perturbed-uniform models is written as a string.
  if (std::isinf(plan.difficulty)) {
    j["difficulty"] = "inf";
  } else {
    j["difficulty"] = plan.difficulty;
  }
  j["gibbs"] = {{"burn_in", plan.gibbs.burn_in}, {"thinning", plan.gibbs.thinning}};
  j["jobs"] = plan.jobs;
  return j;
}

nlohmann::json experiment_json(std::span<const ExperimentPlan> plans, std::span<const ResultTable> tables) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["seed_rule"] = "repetition r uses seed master_seed XOR r";
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < tables.size(); ++i) {
    nlohmann::json run;
    if (i < plans.size()) run["plan"] = to_json(plans[i]);
    run["label"] = tables[i].label;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : tables[i].rows) {
      std::string decisions;
      for (bool d : r.decisions) decisions.push_back(d ? '1' : '0');
      rows.push_back({{"sweep_value", r.sweep_value},
                      {"rejection_rate", r.rejection_rate},
                      {"mean_runtime_seconds", r.mean_runtime_seconds},
                      {"l_used", r.l_used},
                      {"master_seed", r.master_seed},
                      {"repetitions", r.repetitions},
                      {"decisions", decisions}});
    }
    run["rows"] = rows;
    runs.push_back(run);
  }
  j["runs"] = runs;
  return j;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg(std::span<const ResultTable> tables, std::ostream& out, const std::string& title) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 400.0;
  constexpr double kLeft = 60.0;
  constexpr double kRight = 170.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      if (!std::isfinite(r.sweep_value)) continue;
      x_min = std::min(x_min, r.sweep_value);
      x_max = std::max(x_max, r.sweep_value);
    }
  }
  if (!(x_min < x_max)) {
    x_min = std::isfinite(x_min) ? x_min - 1.0 : 0.0;
    x_max = x_min + 2.0;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - y) * plot_h; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(title)
        << "</text>\n";
  }
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << py(0)
      << "\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kLeft << "\" y2=\"" << py(1) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = i / 4.0;
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
  }
  out << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 15 << "\">" << format_double(x_min) << "</text>\n";
  out << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"end\">"
      << format_double(x_max) << "</text>\n";
  const std::string x_label = tables.empty() ? std::string("sweep") : to_string(tables.front().sweep);
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";
  out << "<text x=\"15\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 15 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\">rejection rate</text>\n";
  out << "</g>\n";

  for (std::size_t i = 0; i < tables.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& r : tables[i].rows) {
      if (!std::isfinite(r.sweep_value)) continue;
      if (!first) out << ' ';
      out << px(r.sweep_value) << ',' << py(r.rejection_rate);
      first = false;
    }
    out << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(i);
    out << "<text x=\"" << kWidth - kRight + 12 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" "
        << "font-size=\"11\" fill=\"" << color << "\">" << xml_escape(tables[i].label) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("failed writing SVG output");
}

}  // namespace agginc
