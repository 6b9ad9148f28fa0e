#pragma once

#include "agginc/kernels.hpp"
#include "agginc/rng.hpp"
#include "agginc/types.hpp"

#include <json.hpp>

#include <limits>
#include <vector>

namespace agginc {

// ---------------------------------------------------------------------------
// Perturbed uniform densities on [0, 1]^d.
//
// The cube is cut into P^d cells. Cell v carries sign theta_v and the bump
//   prod_i G(P u_i - v_i - 1) / G_max
// where G is the smooth mean-zero profile on (-1, 0)
//   G(t) =  exp(-1 / (1 - (4t + 3)^2))  on (-1, -1/2)
//   G(t) = -exp(-1 / (1 - (4t + 1)^2))  on (-1/2, 0)
// and G_max = e^{-1}. The density is 1 + (1/S) sum_v theta_v bump_v(u) and
// takes values in [1 - 1/S, 1 + 1/S]. Every bump integrates to zero along
// each axis, so all coordinate marginals are uniform.

struct PerturbedUniformSpec {
  std::size_t dimension = 1;
  std::size_t perturbations = 1;  // P, bumps per axis
  double inverse_scale = 1.0;     // S >= 1; +infinity gives the plain uniform density
  std::vector<int> signs;         // P^d entries in {-1, +1}, cell index row-major over axes

  void validate() const;
};

/// Signs drawn uniformly from {-1, +1}.
PerturbedUniformSpec make_perturbed_uniform(std::size_t dimension, std::size_t perturbations,
                                            double inverse_scale, Rng& rng);

/// One-dimensional bump profile G.
double bump_profile(double t);

double perturbed_uniform_density(const PerturbedUniformSpec& spec, Point u);

/// Rejection sampling from the uniform proposal with acceptance f(u) / (1 + 1/S).
SampleMatrix sample_perturbed_uniform(const PerturbedUniformSpec& spec, std::size_t n, Rng& rng);

/// Joint draws from a (dx + dy)-dimensional perturbed uniform; columns [0, dx)
/// are X, the rest Y. Both marginals are uniform.
SampleMatrix sample_independence_pair(const PerturbedUniformSpec& spec, std::size_t dx, std::size_t dy,
                                      std::size_t n, Rng& rng);

SampleMatrix sample_uniform(std::size_t n, std::size_t dimension, Rng& rng);

// ---------------------------------------------------------------------------
// Gaussian-Bernoulli restricted Boltzmann machine with hidden units in {-1, +1}:
//   p(x, h) ∝ exp(x' B h + b' x + c' h - |x|^2 / 2)
//   log p~(x) = b' x - |x|^2 / 2 + sum_j log(2 cosh((B' x + c)_j))
//   grad log p(x) = b - x + B tanh(B' x + c)

struct GbrbmSpec {
  Eigen::VectorXd b;  // visible bias, length dx
  Eigen::VectorXd c;  // hidden bias, length dh
  Eigen::MatrixXd B;  // dx x dh weights

  std::size_t dx() const { return static_cast<std::size_t>(b.size()); }
  std::size_t dh() const { return static_cast<std::size_t>(c.size()); }
  void validate() const;
};

/// b, c ~ N(0, I); B entries uniform on {-1, +1}.
GbrbmSpec make_gbrbm(std::size_t dx, std::size_t dh, Rng& rng);

/// Copy of `spec` with N(0, sigma^2) noise added to every entry of B.
GbrbmSpec with_weight_noise(const GbrbmSpec& spec, double sigma, Rng& rng);

/// log(2 cosh(a)), stable for large |a|.
double log_two_cosh(double a);

double gbrbm_log_density_unnormalized(const GbrbmSpec& spec, Point x);
Eigen::VectorXd gbrbm_score(const GbrbmSpec& spec, Point x);
ScoreModel gbrbm_score_model(const GbrbmSpec& spec);

/// Score of N(mean, I).
ScoreModel gaussian_score_model(Eigen::VectorXd mean);

struct GibbsSettings {
  std::size_t burn_in = 200;
  std::size_t thinning = 10;
};

/// Block Gibbs chain started from x ~ N(0, I): h | x has independent units
/// with P(h_j = 1) = logistic(2 (B' x + c)_j); x | h ~ N(B h + b, I). After
/// `burn_in` sweeps, every `thinning`-th state is recorded.
SampleMatrix gbrbm_sample(const GbrbmSpec& spec, std::size_t n, Rng& rng, const GibbsSettings& settings = {});

nlohmann::json to_json(const GbrbmSpec& spec);
GbrbmSpec gbrbm_from_json(const nlohmann::json& j);

}  // namespace agginc
