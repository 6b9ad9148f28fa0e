#include "agginc/models.hpp"

#include "agginc/error.hpp"

#include <cmath>

namespace agginc {

namespace {

constexpr double kProfileMax = 0.36787944117144233;  // e^{-1}

std::size_t cell_count(std::size_t perturbations, std::size_t dimension) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < dimension; ++i) n *= perturbations;
  return n;
}

}  // namespace

void PerturbedUniformSpec::validate() const {
  if (dimension == 0) throw ConfigError("perturbed uniform needs dimension >= 1");
  if (perturbations == 0) throw ConfigError("perturbed uniform needs at least one perturbation per axis");
  if (!(inverse_scale >= 1.0)) throw ConfigError("inverse scaling parameter S must be >= 1");
  if (signs.size() != cell_count(perturbations, dimension)) {
    throw ConfigError("perturbed uniform needs one sign per bump");
  }
  for (int s : signs) {
    if (s != 1 && s != -1) throw ConfigError("perturbation signs must be +1 or -1");
  }
}

PerturbedUniformSpec make_perturbed_uniform(std::size_t dimension, std::size_t perturbations,
                                            double inverse_scale, Rng& rng) {
  PerturbedUniformSpec spec;
  spec.dimension = dimension;
  spec.perturbations = perturbations;
  spec.inverse_scale = inverse_scale;
  std::bernoulli_distribution coin(0.5);
  spec.signs.resize(cell_count(perturbations, dimension));
  for (int& s : spec.signs) s = coin(rng) ? 1 : -1;
  spec.validate();
  return spec;
}

double bump_profile(double t) {
  if (t > -1.0 && t < -0.5) {
    const double a = 4.0 * t + 3.0;
    return std::exp(-1.0 / (1.0 - a * a));
  }
  if (t > -0.5 && t < 0.0) {
    const double a = 4.0 * t + 1.0;
    return -std::exp(-1.0 / (1.0 - a * a));
  }
  return 0.0;
}

double perturbed_uniform_density(const PerturbedUniformSpec& spec, Point u) {
  if (u.size() != spec.dimension) throw InputError("point dimension does not match the density");
  for (double v : u) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("perturbed uniform density is defined on [0, 1]^d only");
  }
  if (std::isinf(spec.inverse_scale)) return 1.0;
  const auto p = static_cast<double>(spec.perturbations);
  std::size_t cell = 0;
  double bump = 1.0;
  for (std::size_t i = 0; i < spec.dimension; ++i) {
    const double scaled = p * u[i];
    const auto v = std::min(static_cast<std::size_t>(scaled), spec.perturbations - 1);
    cell = cell * spec.perturbations + v;
    bump *= bump_profile(scaled - static_cast<double>(v) - 1.0) / kProfileMax;
  }
  return 1.0 + static_cast<double>(spec.signs[cell]) * bump / spec.inverse_scale;
}

SampleMatrix sample_uniform(std::size_t n, std::size_t dimension, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SampleMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dimension));
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = unif(rng);
  return out;
}

SampleMatrix sample_perturbed_uniform(const PerturbedUniformSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  const std::size_t d = spec.dimension;
  if (std::isinf(spec.inverse_scale)) return sample_uniform(n, d, rng);
  const double bound = 1.0 + 1.0 / spec.inverse_scale;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SampleMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> candidate(d);
  for (Eigen::Index i = 0; i < out.rows();) {
    for (double& c : candidate) c = unif(rng);
    if (unif(rng) * bound < perturbed_uniform_density(spec, candidate)) {
      for (std::size_t j = 0; j < d; ++j) out(i, static_cast<Eigen::Index>(j)) = candidate[j];
      ++i;
    }
  }
  return out;
}

SampleMatrix sample_independence_pair(const PerturbedUniformSpec& spec, std::size_t dx, std::size_t dy,
                                      std::size_t n, Rng& rng) {
  if (dx == 0 || dy == 0 || spec.dimension != dx + dy) {
    throw ConfigError("joint density dimension must equal dx + dy with dx, dy >= 1");
  }
  return sample_perturbed_uniform(spec, n, rng);
}

void GbrbmSpec::validate() const {
  if (b.size() == 0 || c.size() == 0) throw ConfigError("GBRBM needs dx >= 1 and dh >= 1");
  if (B.rows() != b.size() || B.cols() != c.size()) throw ConfigError("GBRBM weight matrix must be dx x dh");
}

GbrbmSpec make_gbrbm(std::size_t dx, std::size_t dh, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  GbrbmSpec spec;
  spec.b.resize(static_cast<Eigen::Index>(dx));
  spec.c.resize(static_cast<Eigen::Index>(dh));
  spec.B.resize(static_cast<Eigen::Index>(dx), static_cast<Eigen::Index>(dh));
  for (Eigen::Index i = 0; i < spec.b.size(); ++i) spec.b(i) = normal(rng);
  for (Eigen::Index i = 0; i < spec.c.size(); ++i) spec.c(i) = normal(rng);
  for (Eigen::Index i = 0; i < spec.B.size(); ++i) spec.B.data()[i] = coin(rng) ? 1.0 : -1.0;
  spec.validate();
  return spec;
}

GbrbmSpec with_weight_noise(const GbrbmSpec& spec, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("GBRBM noise standard deviation must be >= 0");
  GbrbmSpec out = spec;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index i = 0; i < out.B.size(); ++i) out.B.data()[i] += normal(rng);
  return out;
}

double log_two_cosh(double a) {
  const double m = std::abs(a);
  return m + std::log1p(std::exp(-2.0 * m));
}

double gbrbm_log_density_unnormalized(const GbrbmSpec& spec, Point x) {
  if (x.size() != spec.dx()) throw InputError("GBRBM point has the wrong dimension");
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd act = spec.B.transpose() * v + spec.c;
  double out = spec.b.dot(v) - 0.5 * v.squaredNorm();
  for (Eigen::Index j = 0; j < act.size(); ++j) out += log_two_cosh(act(j));
  return out;
}

Eigen::VectorXd gbrbm_score(const GbrbmSpec& spec, Point x) {
  if (x.size() != spec.dx()) throw InputError("GBRBM point has the wrong dimension");
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd act = spec.B.transpose() * v + spec.c;
  return spec.b - v + spec.B * act.array().tanh().matrix();
}

ScoreModel gbrbm_score_model(const GbrbmSpec& spec) {
  spec.validate();
  ScoreModel model;
  model.dimension = spec.dx();
  model.score = [spec](Point x, std::span<double> out) {
    const Eigen::VectorXd s = gbrbm_score(spec, x);
    std::copy(s.data(), s.data() + s.size(), out.begin());
  };
  return model;
}

ScoreModel gaussian_score_model(Eigen::VectorXd mean) {
  ScoreModel model;
  model.dimension = static_cast<std::size_t>(mean.size());
  model.score = [mean = std::move(mean)](Point x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = mean(static_cast<Eigen::Index>(i)) - x[i];
  };
  return model;
}

SampleMatrix gbrbm_sample(const GbrbmSpec& spec, std::size_t n, Rng& rng, const GibbsSettings& settings) {
  spec.validate();
  if (settings.burn_in == 0 || settings.thinning == 0) {
    throw ConfigError("Gibbs burn-in and thinning must be positive");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto dx = static_cast<Eigen::Index>(spec.dx());
  const auto dh = static_cast<Eigen::Index>(spec.dh());

  Eigen::VectorXd x(dx);
  Eigen::VectorXd h(dh);
  for (Eigen::Index i = 0; i < dx; ++i) x(i) = normal(rng);

  auto sweep = [&] {
    const Eigen::VectorXd act = spec.B.transpose() * x + spec.c;
    for (Eigen::Index j = 0; j < dh; ++j) {
      const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * act(j)));
      h(j) = unif(rng) < p_plus ? 1.0 : -1.0;
    }
    x = spec.B * h + spec.b;
    for (Eigen::Index i = 0; i < dx; ++i) x(i) += normal(rng);
  };

  for (std::size_t t = 0; t < settings.burn_in; ++t) sweep();
  SampleMatrix out(static_cast<Eigen::Index>(n), dx);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (std::size_t t = 0; t < settings.thinning; ++t) sweep();
    out.row(r) = x.transpose();
  }
  return out;
}

nlohmann::json to_json(const GbrbmSpec& spec) {
  nlohmann::json j;
  j["b"] = std::vector<double>(spec.b.data(), spec.b.data() + spec.b.size());
  j["c"] = std::vector<double>(spec.c.data(), spec.c.data() + spec.c.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < spec.B.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(spec.B.cols()));
    for (Eigen::Index k = 0; k < spec.B.cols(); ++k) r[static_cast<std::size_t>(k)] = spec.B(i, k);
    rows.push_back(r);
  }
  j["B"] = rows;
  return j;
}

GbrbmSpec gbrbm_from_json(const nlohmann::json& j) {
  try {
    const auto b = j.at("b").get<std::vector<double>>();
    const auto c = j.at("c").get<std::vector<double>>();
    const auto rows = j.at("B").get<std::vector<std::vector<double>>>();
    GbrbmSpec spec;
    spec.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    spec.c = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    spec.B.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != c.size()) throw ConfigError("GBRBM weight rows must have dh entries");
      for (std::size_t k = 0; k < c.size(); ++k) {
        spec.B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid GBRBM parameters: ") + e.what());
  }
}

}  // namespace agginc
