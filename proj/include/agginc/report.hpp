#pragma once

#include "agginc/testing.hpp"

#include <json.hpp>

#include <string>

namespace agginc {

nlohmann::json to_json(const KernelSpec& spec);
nlohmann::json to_json(const AggTestResult& result);

/// One-line CSV summary of a test result, for tabulation.
std::string agg_result_csv_header();
std::string agg_result_csv_row(const AggTestResult& result);

/// "reject H0" / "accept H0" with the per-bandwidth detail on one line.
std::string describe(const AggTestResult& result);

}  // namespace agginc
