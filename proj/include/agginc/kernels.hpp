#pragma once

#include "agginc/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace agginc {

enum class KernelFamily { Gaussian, Imq };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

/// Translation-invariant kernel with one bandwidth per coordinate.
///
///   Gaussian: k(x, y) = exp(-sum_i (x_i - y_i)^2 / bw_i^2)
///   IMQ:      k(x, y) = (1 + sum_i (x_i - y_i)^2 / bw_i^2)^(-beta),  beta in (0, 1)
///
/// Both take values in (0, 1] and equal 1 only on the diagonal.
class KernelSpec {
 public:
  KernelSpec(KernelFamily family, std::vector<double> bandwidths, double imq_exponent = 0.5);

  static KernelSpec gaussian(double bandwidth, std::size_t dimension);
  static KernelSpec imq(double bandwidth, std::size_t dimension, double exponent = 0.5);

  KernelFamily family() const { return family_; }
  const std::vector<double>& bandwidths() const { return bandwidths_; }
  std::size_t dimension() const { return bandwidths_.size(); }
  double imq_exponent() const { return imq_exponent_; }

  /// Same family with every bandwidth multiplied by `factor`.
  KernelSpec scaled(double factor) const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  KernelFamily family_;
  std::vector<double> bandwidths_;
  double imq_exponent_;
};

/// Evaluator of x -> grad log p(x) for a model density p on R^d.
struct ScoreModel {
  std::size_t dimension = 0;
  std::function<void(Point x, std::span<double> out)> score;

  Eigen::VectorXd operator()(Point x) const;
};

double eval_kernel(const KernelSpec& spec, Point x, Point y);

/// Kernel value with its first derivatives in each argument and the trace
/// sum_i d^2 k / dx_i dy_i, all in closed form.
struct KernelDerivatives {
  double value = 0.0;
  std::vector<double> grad_x;
  std::vector<double> grad_y;
  double mixed_trace = 0.0;
};

KernelDerivatives kernel_derivatives(const KernelSpec& spec, Point x, Point y);

/// k(x1, x2) - k(x1, y2) - k(x2, y1) + k(y1, y2)
double h_mmd(const KernelSpec& spec, Point x1, Point x2, Point y1, Point y2);

/// A sample of the independence problem split into its two components.
struct JointPoint {
  Point x;
  Point y;
};

/// (1/4) h_mmd(k; x1, x2, x3, x4) * h_mmd(l; y1, y2, y3, y4)
double h_hsic(const KernelSpec& kspec, const KernelSpec& lspec, const JointPoint& z1,
              const JointPoint& z2, const JointPoint& z3, const JointPoint& z4);

/// Stein kernel of `model` built on `spec`.
double h_ksd(const KernelSpec& spec, const ScoreModel& model, Point x, Point y);

/// Stein kernel with scores already evaluated at x and y. This is the hot path
/// used when caching: no allocation.
double h_ksd(const KernelSpec& spec, Point x, Point y, Point score_x, Point score_y);

/// Median of Euclidean distances over all unordered pairs of distinct rows.
/// For an even pair count the two middle values are averaged.
double median_bandwidth(const SampleMatrix& points);

}  // namespace agginc
