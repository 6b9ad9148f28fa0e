#include "agginc/kernels.hpp"

#include "agginc/error.hpp"

#include <algorithm>
#include <cmath>

namespace agginc {

namespace {

void require_same_dimension(const KernelSpec& spec, Point x, Point y) {
  if (x.size() != spec.dimension() || y.size() != spec.dimension()) {
    throw InputError("kernel dimension mismatch: kernel has " + std::to_string(spec.dimension()) +
                     " bandwidths, points have " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()) + " coordinates");
  }
}

// sum_i (x_i - y_i)^2 / bw_i^2
double scaled_sq_distance(const std::vector<double>& bw, Point x, Point y) {
  double q = 0.0;
  for (std::size_t i = 0; i < bw.size(); ++i) {
    const double t = (x[i] - y[i]) / bw[i];
    q += t * t;
  }
  return q;
}

double kernel_from_sq(const KernelSpec& spec, double q) {
  switch (spec.family()) {
    case KernelFamily::Gaussian:
      return std::exp(-q);
    case KernelFamily::Imq:
      return std::pow(1.0 + q, -spec.imq_exponent());
  }
  throw ConfigError("unsupported kernel family");
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian:
      return "gaussian";
    case KernelFamily::Imq:
      return "imq";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "imq") return KernelFamily::Imq;
  throw ConfigError("unknown kernel family '" + name + "' (expected gaussian or imq)");
}

KernelSpec::KernelSpec(KernelFamily family, std::vector<double> bandwidths, double imq_exponent)
    : family_(family), bandwidths_(std::move(bandwidths)), imq_exponent_(imq_exponent) {
  if (bandwidths_.empty()) throw ConfigError("kernel needs at least one bandwidth");
  for (double bw : bandwidths_) {
    if (!(bw > 0.0) || !std::isfinite(bw)) {
      throw ConfigError("kernel bandwidths must be finite and strictly positive");
    }
  }
  if (family_ == KernelFamily::Imq && !(imq_exponent_ > 0.0 && imq_exponent_ < 1.0)) {
    throw ConfigError("IMQ exponent must lie in (0, 1)");
  }
  if (family_ != KernelFamily::Gaussian && family_ != KernelFamily::Imq) {
    throw ConfigError("unsupported kernel family");
  }
}

KernelSpec KernelSpec::gaussian(double bandwidth, std::size_t dimension) {
  return KernelSpec(KernelFamily::Gaussian, std::vector<double>(dimension, bandwidth));
}

KernelSpec KernelSpec::imq(double bandwidth, std::size_t dimension, double exponent) {
  return KernelSpec(KernelFamily::Imq, std::vector<double>(dimension, bandwidth), exponent);
}

KernelSpec KernelSpec::scaled(double factor) const {
  std::vector<double> bw = bandwidths_;
  for (double& b : bw) b *= factor;
  return KernelSpec(family_, std::move(bw), imq_exponent_);
}

Eigen::VectorXd ScoreModel::operator()(Point x) const {
  if (x.size() != dimension) {
    throw InputError("score model expects dimension " + std::to_string(dimension) + ", got " +
                     std::to_string(x.size()));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(dimension));
  score(x, std::span<double>(out.data(), dimension));
  return out;
}

double eval_kernel(const KernelSpec& spec, Point x, Point y) {
  require_same_dimension(spec, x, y);
  return kernel_from_sq(spec, scaled_sq_distance(spec.bandwidths(), x, y));
}

KernelDerivatives kernel_derivatives(const KernelSpec& spec, Point x, Point y) {
  require_same_dimension(spec, x, y);
  const auto& bw = spec.bandwidths();
  const std::size_t d = bw.size();
  const double q = scaled_sq_distance(bw, x, y);

  KernelDerivatives out;
  out.grad_x.resize(d);
  out.grad_y.resize(d);

  // With u = q (Gaussian) or u = 1 + q (IMQ) and k = f(u):
  //   dk/dx_i = f'(u) * 2 delta_i w_i,   dk/dy_i = -dk/dx_i
  //   d2k/dx_i dy_i = -f'(u) 2 w_i - f''(u) 4 delta_i^2 w_i^2
  double f1 = 0.0;
  double f2 = 0.0;
  switch (spec.family()) {
    case KernelFamily::Gaussian:
      out.value = std::exp(-q);
      f1 = -out.value;
      f2 = out.value;
      break;
    case KernelFamily::Imq: {
      const double beta = spec.imq_exponent();
      const double u = 1.0 + q;
      out.value = std::pow(u, -beta);
      f1 = -beta * out.value / u;
      f2 = beta * (beta + 1.0) * out.value / (u * u);
      break;
    }
  }

  for (std::size_t i = 0; i < d; ++i) {
    const double w = 1.0 / (bw[i] * bw[i]);
    const double delta = x[i] - y[i];
    out.grad_x[i] = 2.0 * f1 * delta * w;
    out.grad_y[i] = -out.grad_x[i];
    out.mixed_trace += -2.0 * f1 * w - 4.0 * f2 * delta * delta * w * w;
  }
  return out;
}

double h_mmd(const KernelSpec& spec, Point x1, Point x2, Point y1, Point y2) {
  return eval_kernel(spec, x1, x2) - eval_kernel(spec, x1, y2) - eval_kernel(spec, x2, y1) +
         eval_kernel(spec, y1, y2);
}

double h_hsic(const KernelSpec& kspec, const KernelSpec& lspec, const JointPoint& z1,
              const JointPoint& z2, const JointPoint& z3, const JointPoint& z4) {
  return 0.25 * h_mmd(kspec, z1.x, z2.x, z3.x, z4.x) * h_mmd(lspec, z1.y, z2.y, z3.y, z4.y);
}

double h_ksd(const KernelSpec& spec, const ScoreModel& model, Point x, Point y) {
  require_same_dimension(spec, x, y);
  const Eigen::VectorXd sx = model(x);
  const Eigen::VectorXd sy = model(y);
  return h_ksd(spec, x, y, Point(sx.data(), x.size()), Point(sy.data(), y.size()));
}

double h_ksd(const KernelSpec& spec, Point x, Point y, Point score_x, Point score_y) {
  const auto& bw = spec.bandwidths();
  const std::size_t d = bw.size();
  if (x.size() != d || y.size() != d || score_x.size() != d || score_y.size() != d) {
    throw InputError("Stein kernel dimension mismatch");
  }

  double q = 0.0;
  double score_dot = 0.0;
  double cross = 0.0;  // sum_i (sy_i - sx_i) delta_i w_i
  double trace_lin = 0.0;  // sum_i w_i
  double trace_quad = 0.0;  // sum_i delta_i^2 w_i^2
  for (std::size_t i = 0; i < d; ++i) {
    const double w = 1.0 / (bw[i] * bw[i]);
    const double delta = x[i] - y[i];
    const double dw = delta * w;
    q += delta * dw;
    score_dot += score_x[i] * score_y[i];
    cross += (score_y[i] - score_x[i]) * dw;
    trace_lin += w;
    trace_quad += dw * dw;
  }

  switch (spec.family()) {
    case KernelFamily::Gaussian: {
      const double k = std::exp(-q);
      return k * (score_dot - 2.0 * cross + 2.0 * trace_lin - 4.0 * trace_quad);
    }
    case KernelFamily::Imq: {
      const double beta = spec.imq_exponent();
      const double u = 1.0 + q;
      const double k = std::pow(u, -beta);
      const double f1 = -beta * k / u;
      const double f2 = beta * (beta + 1.0) * k / (u * u);
      return score_dot * k + 2.0 * f1 * cross - 2.0 * f1 * trace_lin - 4.0 * f2 * trace_quad;
    }
  }
  throw ConfigError("unsupported kernel family for Stein kernel");
}

double median_bandwidth(const SampleMatrix& points) {
  const auto n = points.rows();
  if (n < 2) throw InputError("median bandwidth needs at least 2 points");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back((points.row(i) - points.row(j)).norm());
    }
  }
  const std::size_t m = dist.size();
  const std::size_t mid = m / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (m % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  if (!(median > 0.0)) {
    throw DegenerateDataError("median pairwise distance is zero; data are degenerate");
  }
  return median;
}

}  // namespace agginc
