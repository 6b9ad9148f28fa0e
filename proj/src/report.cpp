#include "agginc/report.hpp"

#include "agginc/csv.hpp"

#include <sstream>

namespace agginc {

nlohmann::json to_json(const KernelSpec& spec) {
  nlohmann::json j;
  j["family"] = to_string(spec.family());
  j["bandwidths"] = spec.bandwidths();
  if (spec.family() == KernelFamily::Imq) j["imq_exponent"] = spec.imq_exponent();
  return j;
}

nlohmann::json to_json(const AggTestResult& result) {
  nlohmann::json j;
  j["problem"] = to_string(result.problem);
  j["reject"] = result.reject;
  j["decision"] = result.reject ? "reject" : "accept";
  j["u_alpha"] = result.u_alpha;
  j["degenerate_correction"] = result.degenerate_correction;
  j["l_used"] = result.l_used;
  j["n_items"] = result.n_items;
  j["seed"] = result.seed;
  j["design"] = {{"kind", to_string(result.design.kind)},
                 {"subdiagonals", result.design.subdiagonals},
                 {"seed", result.design.seed}};
  j["config"] = {{"alpha", result.config.alpha},
                 {"B1", result.config.B1},
                 {"B2", result.config.B2},
                 {"B3", result.config.B3}};
  nlohmann::json per = nlohmann::json::array();
  for (const auto& o : result.per_bandwidth) {
    nlohmann::json e;
    nlohmann::json kernels = nlohmann::json::array();
    for (const auto& k : o.kernels) kernels.push_back(to_json(k));
    e["kernels"] = kernels;
    e["weight"] = o.weight;
    e["statistic"] = o.statistic;
    e["level"] = o.level;
    e["quantile"] = o.quantile;
    e["reject"] = o.reject;
    per.push_back(e);
  }
  j["per_bandwidth"] = per;
  return j;
}

std::string agg_result_csv_header() {
  return "problem,reject,u_alpha,l_used,n_items,design,alpha,B1,B2,B3,seed,n_bandwidths,bandwidths_rejecting";
}

std::string agg_result_csv_row(const AggTestResult& result) {
  std::size_t rejecting = 0;
  for (const auto& o : result.per_bandwidth) rejecting += o.reject ? 1 : 0;
  std::ostringstream out;
  out << to_string(result.problem) << ',' << (result.reject ? 1 : 0) << ',' << format_double(result.u_alpha) << ','
      << result.l_used << ',' << result.n_items << ',' << to_string(result.design.kind) << ','
      << format_double(result.config.alpha) << ',' << result.config.B1 << ',' << result.config.B2 << ','
      << result.config.B3 << ',' << result.seed << ',' << result.per_bandwidth.size() << ',' << rejecting;
  return out.str();
}

std::string describe(const AggTestResult& result) {
  std::ostringstream out;
  out << (result.reject ? "reject H0" : "accept H0") << " (" << to_string(result.problem)
      << ", alpha=" << result.config.alpha << ", u_alpha=" << result.u_alpha << ", L=" << result.l_used << ")";
  for (const auto& o : result.per_bandwidth) {
    out << "\n  bandwidth";
    for (const auto& k : o.kernels) out << ' ' << k.bandwidths().front();
    out << ": statistic=" << o.statistic << " quantile=" << o.quantile << (o.reject ? " *" : "");
  }
  if (result.degenerate_correction) out << "\n  note: level correction degenerate (u_alpha = 0)";
  return out.str();
}

}  // namespace agginc
