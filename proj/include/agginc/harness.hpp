#pragma once

#include "agginc/estimators.hpp"
#include "agginc/models.hpp"
#include "agginc/testing.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace agginc {

enum class SweepVariable { SampleSize, Dimension, Difficulty, Subdiagonals };

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& name);

/// A level/power/runtime experiment. Data models:
///   TwoSample     X ~ U[0,1]^d against Y ~ perturbed uniform (P, S) on [0,1]^d
///   Independence  (X, Y) ~ perturbed uniform on [0,1]^{dx+dy}
///   GoodnessOfFit model GBRBM p (dx, dh); samples from p with weight noise sigma
/// `difficulty` is S for the first two (+inf is the null) and sigma for the
/// last (0 is the null). The swept variable overrides the matching base value:
/// Dimension means d, dy and dh respectively.
struct ExperimentPlan {
  Problem problem = Problem::TwoSample;
  SweepVariable sweep = SweepVariable::SampleSize;
  std::vector<double> values;
  std::size_t repetitions = 100;
  std::uint64_t master_seed = 0;

  DesignRequest design;
  TestConfig config;
  CollectionKind collection = CollectionKind::Median;
  std::optional<KernelFamily> family;  // Gaussian for MMD/HSIC, IMQ for KSD when unset

  std::size_t sample_size = 500;
  std::size_t d = 1;
  std::size_t dx = 1;
  std::size_t dy = 1;
  std::size_t dh = 40;
  std::size_t perturbations = 2;
  double difficulty = 2.0;
  GibbsSettings gibbs;

  std::size_t jobs = 1;

  void validate() const;
};

struct ResultRow {
  double sweep_value = 0.0;
  double rejection_rate = 0.0;
  double mean_runtime_seconds = 0.0;
  std::size_t l_used = 0;
  std::uint64_t master_seed = 0;  // repetition r used seed master_seed ^ r
  std::size_t repetitions = 0;
  std::vector<bool> decisions;   // one per repetition, in repetition order

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultTable {
  std::string label;
  SweepVariable sweep = SweepVariable::SampleSize;
  std::vector<ResultRow> rows;

  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

/// Seed of repetition `rep` under `master_seed`.
inline std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t rep) {
  return master_seed ^ static_cast<std::uint64_t>(rep);
}

/// Outcome of one repetition: decision, wall-clock seconds of the test call
/// (data generation excluded), and design size.
struct RepetitionOutcome {
  bool reject = false;
  double seconds = 0.0;
  std::size_t l_used = 0;
};

/// Data of one repetition. TwoSample: x, y samples. Independence: paired x, y.
/// GoodnessOfFit: x holds the samples and `model` the GBRBM under test.
struct ExperimentData {
  SampleMatrix x;
  SampleMatrix y;
  std::optional<GbrbmSpec> model;
};

ExperimentData generate_data(const ExperimentPlan& plan, double sweep_value, std::uint64_t seed);

/// Generates the data of one repetition and runs the matching aggregated test.
RepetitionOutcome run_repetition(const ExperimentPlan& plan, double sweep_value, std::uint64_t seed);

/// Runs every sweep value; repetitions are spread over plan.jobs threads.
ResultTable run_experiment(const ExperimentPlan& plan, std::string label = {});

std::string default_label(const ExperimentPlan& plan);

/// Columns: label, sweep_variable, sweep_value, rejection_rate,
/// mean_runtime_seconds, l_used, master_seed, repetitions, decisions (0/1 string).
/// Numbers are written round-trip exact.
void write_tables_csv(std::span<const ResultTable> tables, std::ostream& out);
std::vector<ResultTable> read_tables_csv(std::istream& in);

nlohmann::json to_json(const ExperimentPlan& plan);
nlohmann::json experiment_json(std::span<const ExperimentPlan> plans, std::span<const ResultTable> tables);

/// Line chart of rejection rate against the sweep variable, one polyline per table.
void write_svg(std::span<const ResultTable> tables, std::ostream& out, const std::string& title = {});

}  // namespace agginc
