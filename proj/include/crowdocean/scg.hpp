#pragma once

// Scaled Conjugate Gradient training for the socialization classifier.
// Full-batch, second-order information estimated by a finite difference
// along the conjugate direction, with the Levenberg-Marquardt style lambda
// scaling that keeps the step well conditioned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fmt/format.h>
#include <numeric>
#include <span>
#include <vector>

#include "crowdocean/core.hpp"
#include "crowdocean/mlp.hpp"

namespace crowdocean {

struct TrainConfig {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double sigma0 = 1e-4;
  double lambda0 = 1e-6;
  double split_fraction = 0.7;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (!(gradient_tolerance > 0.0)) throw ConfigError("gradient_tolerance must be positive");
    if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
    if (!(lambda0 > 0.0)) throw ConfigError("lambda0 must be positive");
    if (!(split_fraction > 0.0) || !(split_fraction < 1.0)) {
      throw ConfigError("split_fraction must lie strictly between 0 and 1");
    }
  }
};

struct SplitSets {
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> validation;
  bool single_class = false;
};

// Shuffled split. The train side gets floor(fraction * n) samples (with a
// small bias term so exact multiples are not lost to rounding), and both
// sides keep at least one sample. When the full set carries both classes,
// deterministic swaps guarantee the train side sees both; the validation
// side gets both too whenever that does not strip the train side.
inline SplitSets split_dataset(std::span<const TrainingSample> samples, double fraction,
                               Rng& rng) {
  if (samples.size() < 10) {
    throw InsufficientDataError(
        fmt::format("need at least 10 samples to split, got {}", samples.size()));
  }
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw ConfigError("split fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());

  const auto n = samples.size();
  auto n_train = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n) + 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  SplitSets out;
  out.train.reserve(n_train);
  out.validation.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? out.train : out.validation).push_back(samples[order[i]]);
  }

  const auto count_social = [](const std::vector<TrainingSample>& v) {
    return static_cast<std::size_t>(
        std::count_if(v.begin(), v.end(), [](const TrainingSample& s) { return s.social; }));
  };
  const std::size_t total_social = count_social(out.train) + count_social(out.validation);
  if (total_social == 0 || total_social == n) {
    out.single_class = true;
    return out;
  }
  // The train side is fixed first and later never gives away its last sample
  // of a class, so a one-sample minority always ends up on the train side.
  const auto rebalance = [](std::vector<TrainingSample>& needy,
                            std::vector<TrainingSample>& donor, bool missing_label,
                            std::size_t donor_keep) {
    const auto count = [&](const std::vector<TrainingSample>& v) {
      return static_cast<std::size_t>(std::count_if(
          v.begin(), v.end(), [&](const TrainingSample& s) { return s.social == missing_label; }));
    };
    if (count(needy) > 0 || count(donor) <= donor_keep) return;
    auto give = std::find_if(donor.begin(), donor.end(),
                             [&](const TrainingSample& s) { return s.social == missing_label; });
    auto take = std::find_if(needy.begin(), needy.end(),
                             [&](const TrainingSample& s) { return s.social != missing_label; });
    std::swap(*give, *take);
  };
  for (const bool label : {true, false}) rebalance(out.train, out.validation, label, 0);
  for (const bool label : {true, false}) rebalance(out.validation, out.train, label, 1);
  return out;
}

struct TrainReport {
  int iterations = 0;
  double final_loss = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  bool single_class_warning = false;
};

struct TrainOutcome {
  MlpWeights model;
  TrainReport report;
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::size_t true_social = 0;
  std::size_t false_social = 0;
  std::size_t true_not_social = 0;
  std::size_t false_not_social = 0;
};

inline EvalReport evaluate(const MlpWeights& w, std::span<const TrainingSample> samples) {
  EvalReport r;
  r.total = samples.size();
  for (const TrainingSample& s : samples) {
    const bool predicted = forward(w, s.input).social >= 0.5;
    if (predicted && s.social) ++r.true_social;
    else if (predicted && !s.social) ++r.false_social;
    else if (!predicted && !s.social) ++r.true_not_social;
    else ++r.false_not_social;
  }
  r.correct = r.true_social + r.true_not_social;
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

namespace detail {

inline double dot(const ParamVector& a, const ParamVector& b) {
  double s = 0.0;
  for (int i = 0; i < kParamCount; ++i) s += a[i] * b[i];
  return s;
}

inline void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw TrainingError(fmt::format("{} became non-finite during training", what));
  }
}

}  // namespace detail

inline TrainOutcome scg_train(std::span<const TrainingSample> samples, const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SplitSets split = split_dataset(samples, cfg.split_fraction, rng);

  MlpWeights model;
  model.norm = Normalizer::fit(split.train);
  model.meta.seed = cfg.seed;

  ParamVector w{};
  for (double& v : w) v = rng.uniform() - 0.5;
  from_param_vector(w, model);

  const std::span<const TrainingSample> train(split.train);
  ParamVector grad{};
  double loss = batch_loss_and_gradient(model, train, grad);
  detail::check_finite(loss, "loss");

  ParamVector r{};
  for (int i = 0; i < kParamCount; ++i) r[i] = -grad[i];
  ParamVector p = r;

  double lambda = cfg.lambda0;
  double lambda_bar = 0.0;
  bool success = true;
  double delta = 0.0;
  double p_sq = detail::dot(p, p);
  double r_norm = std::sqrt(detail::dot(r, r));

  // Scratch buffers for the finite-difference probe.
  ParamVector w_probe{}, grad_probe{}, s_vec{};
  MlpWeights probe_model = model;

  const auto second_order = [&]() {
    const double p_norm = std::sqrt(p_sq);
    const double sigma_k = cfg.sigma0 / p_norm;
    for (int i = 0; i < kParamCount; ++i) w_probe[i] = w[i] + sigma_k * p[i];
    from_param_vector(w_probe, probe_model);
    batch_loss_and_gradient(probe_model, train, grad_probe);
    for (int i = 0; i < kParamCount; ++i) s_vec[i] = (grad_probe[i] - grad[i]) / sigma_k;
    delta = detail::dot(p, s_vec);
  };

  int iterations = 0;
  bool converged = r_norm <= cfg.gradient_tolerance;

  for (int k = 1; k <= cfg.max_iterations && !converged; ++k) {
    iterations = k;
    if (success) second_order();
    delta += (lambda - lambda_bar) * p_sq;
    if (delta <= 0.0) {
      lambda_bar = 2.0 * (lambda - delta / p_sq);
      delta = -delta + lambda * p_sq;
      lambda = lambda_bar;
    }
    double mu = detail::dot(p, r);
    if (mu <= 0.0) {
      // The direction lost descent; restart along the steepest descent.
      p = r;
      p_sq = detail::dot(p, p);
      second_order();
      delta += (lambda - lambda_bar) * p_sq;
      if (delta <= 0.0) {
        lambda_bar = 2.0 * (lambda - delta / p_sq);
        delta = -delta + lambda * p_sq;
        lambda = lambda_bar;
      }
      mu = detail::dot(p, r);
    }
    const double alpha = mu / delta;
    detail::check_finite(alpha, "step size");
    const double step_p_sq = p_sq;

    for (int i = 0; i < kParamCount; ++i) w_probe[i] = w[i] + alpha * p[i];
    from_param_vector(w_probe, probe_model);
    const double loss_new = batch_loss(probe_model, train);
    detail::check_finite(loss_new, "loss");
    const double comparison = 2.0 * delta * (loss - loss_new) / (mu * mu);

    if (comparison >= 0.0) {
      w = w_probe;
      loss = batch_loss_and_gradient(probe_model, train, grad);
      model = probe_model;
      ParamVector r_new{};
      for (int i = 0; i < kParamCount; ++i) r_new[i] = -grad[i];
      lambda_bar = 0.0;
      success = true;
      if (k % kParamCount == 0) {
        p = r_new;
      } else {
        const double beta = (detail::dot(r_new, r_new) - detail::dot(r_new, r)) / mu;
        for (int i = 0; i < kParamCount; ++i) p[i] = r_new[i] + beta * p[i];
      }
      p_sq = detail::dot(p, p);
      if (comparison >= 0.75) lambda *= 0.25;
      r = r_new;
      r_norm = std::sqrt(detail::dot(r, r));
    } else {
      lambda_bar = lambda;
      success = false;
    }
    if (comparison < 0.25) lambda += delta * (1.0 - comparison) / step_p_sq;
    detail::check_finite(lambda, "lambda");
    if (r_norm <= cfg.gradient_tolerance) converged = true;
  }

  from_param_vector(w, model);
  model.meta.iterations = iterations;
  model.meta.trained = true;

  TrainOutcome out;
  out.report.iterations = iterations;
  out.report.final_loss = loss;
  out.report.gradient_norm = r_norm;
  out.report.converged = converged;
  out.report.single_class_warning = split.single_class;
  out.report.train_accuracy = evaluate(model, split.train).accuracy;
  out.report.validation_accuracy = evaluate(model, split.validation).accuracy;
  model.meta.validation_accuracy = out.report.validation_accuracy;
  out.model = model;
  return out;
}

// Probability that the agent behaves socially, straight from the network.
inline double predict_socialization(const MlpWeights& w, const InputVector& input) {
  if (!w.meta.trained) {
    throw UsageError("model has not been trained; train or load a trained model first");
  }
  return forward(w, input).social;
}

inline double isolation_from_socialization(double socialization) {
  return 1.0 - socialization;
}

}  // namespace crowdocean
