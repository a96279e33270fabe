#pragma once

// The socialization classifier: a 3-10-2 feed-forward network (inputs
// collectivity, mean neighbor distance, social-space count; outputs the
// probabilities of social / not-social behavior). Inputs are z-scored with
// statistics frozen at training time and stored with the model. This header
// holds the network math and the model file format; training lives in
// scg.hpp.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "crowdocean/core.hpp"

namespace crowdocean {

inline constexpr int kInputDim = 3;
inline constexpr int kHiddenDim = 10;
inline constexpr int kOutputDim = 2;
inline constexpr int kParamCount =
    kHiddenDim * kInputDim + kHiddenDim + kOutputDim * kHiddenDim + kOutputDim;  // 62

inline constexpr int kModelFormatVersion = 1;

using InputVector = std::array<double, kInputDim>;

// Input order is fixed: (collectivity, mean distance, social-space count).
struct TrainingSample {
  InputVector input{};
  bool social = false;
};

struct Normalizer {
  InputVector mean{0.0, 0.0, 0.0};
  InputVector stddev{1.0, 1.0, 1.0};

  [[nodiscard]] InputVector apply(const InputVector& in) const {
    InputVector z;
    for (int i = 0; i < kInputDim; ++i) z[i] = (in[i] - mean[i]) / stddev[i];
    return z;
  }

  // Population statistics; a constant feature keeps stddev 1 so it passes
  // through centered instead of dividing by zero.
  static Normalizer fit(std::span<const TrainingSample> samples) {
    Normalizer n;
    if (samples.empty()) return n;
    const double count = static_cast<double>(samples.size());
    InputVector sum{}, sq{};
    for (const TrainingSample& s : samples) {
      for (int i = 0; i < kInputDim; ++i) {
        sum[i] += s.input[i];
        sq[i] += s.input[i] * s.input[i];
      }
    }
    for (int i = 0; i < kInputDim; ++i) {
      n.mean[i] = sum[i] / count;
      const double var = std::max(0.0, sq[i] / count - n.mean[i] * n.mean[i]);
      const double sd = std::sqrt(var);
      n.stddev[i] = sd > 1e-12 ? sd : 1.0;
    }
    return n;
  }
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int iterations = 0;
  double validation_accuracy = 0.0;
  bool trained = false;
};

struct MlpWeights {
  std::array<std::array<double, kInputDim>, kHiddenDim> hidden_w{};
  std::array<double, kHiddenDim> hidden_b{};
  std::array<std::array<double, kHiddenDim>, kOutputDim> output_w{};
  std::array<double, kOutputDim> output_b{};
  Normalizer norm{};
  TrainingMeta meta{};
};

struct Probabilities {
  double social = 0.0;
  double not_social = 0.0;
};

namespace detail {

struct ForwardTrace {
  InputVector z{};
  std::array<double, kHiddenDim> hidden{};
  std::array<double, kOutputDim> prob{};
};

// tanh hidden layer, softmax output; the max-logit shift keeps exp() tame.
inline ForwardTrace forward_trace(const MlpWeights& w, const InputVector& input) {
  ForwardTrace t;
  t.z = w.norm.apply(input);
  for (int j = 0; j < kHiddenDim; ++j) {
    double a = w.hidden_b[j];
    for (int i = 0; i < kInputDim; ++i) a += w.hidden_w[j][i] * t.z[i];
    t.hidden[j] = std::tanh(a);
  }
  std::array<double, kOutputDim> logits{};
  for (int k = 0; k < kOutputDim; ++k) {
    double a = w.output_b[k];
    for (int j = 0; j < kHiddenDim; ++j) a += w.output_w[k][j] * t.hidden[j];
    logits[k] = a;
  }
  const double shift = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - shift);
  const double e1 = std::exp(logits[1] - shift);
  t.prob = {e0 / (e0 + e1), e1 / (e0 + e1)};
  return t;
}

}  // namespace detail

inline Probabilities forward(const MlpWeights& w, const InputVector& input) {
  for (const double v : input) {
    if (!std::isfinite(v)) {
      throw ValidationError("classifier input must be finite");
    }
  }
  const auto trace = detail::forward_trace(w, input);
  return {trace.prob[0], trace.prob[1]};
}

// --- flat parameter vector (training works on this view) ---------------------

using ParamVector = std::array<double, kParamCount>;

inline ParamVector to_param_vector(const MlpWeights& w) {
  ParamVector p{};
  int idx = 0;
  for (int j = 0; j < kHiddenDim; ++j)
    for (int i = 0; i < kInputDim; ++i) p[idx++] = w.hidden_w[j][i];
  for (int j = 0; j < kHiddenDim; ++j) p[idx++] = w.hidden_b[j];
  for (int k = 0; k < kOutputDim; ++k)
    for (int j = 0; j < kHiddenDim; ++j) p[idx++] = w.output_w[k][j];
  for (int k = 0; k < kOutputDim; ++k) p[idx++] = w.output_b[k];
  return p;
}

inline void from_param_vector(const ParamVector& p, MlpWeights& w) {
  int idx = 0;
  for (int j = 0; j < kHiddenDim; ++j)
    for (int i = 0; i < kInputDim; ++i) w.hidden_w[j][i] = p[idx++];
  for (int j = 0; j < kHiddenDim; ++j) w.hidden_b[j] = p[idx++];
  for (int k = 0; k < kOutputDim; ++k)
    for (int j = 0; j < kHiddenDim; ++j) w.output_w[k][j] = p[idx++];
  for (int k = 0; k < kOutputDim; ++k) w.output_b[k] = p[idx++];
}

// --- loss and gradient --------------------------------------------------------

// Mean cross-entropy over the batch.
inline double batch_loss(const MlpWeights& w, std::span<const TrainingSample> batch) {
  double loss = 0.0;
  for (const TrainingSample& s : batch) {
    const auto t = detail::forward_trace(w, s.input);
    const double p = s.social ? t.prob[0] : t.prob[1];
    loss -= std::log(std::max(p, 1e-300));
  }
  return loss / static_cast<double>(batch.size());
}

// Backpropagation for the same mean cross-entropy; returns the loss and
// fills grad (same layout as the parameter vector).
inline double batch_loss_and_gradient(const MlpWeights& w,
                                      std::span<const TrainingSample> batch,
                                      ParamVector& grad) {
  grad.fill(0.0);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const TrainingSample& s : batch) {
    const auto t = detail::forward_trace(w, s.input);
    const int label = s.social ? 0 : 1;
    loss -= std::log(std::max(t.prob[label], 1e-300));

    std::array<double, kOutputDim> dlogit = t.prob;
    dlogit[label] -= 1.0;
    for (int k = 0; k < kOutputDim; ++k) dlogit[k] *= inv_n;

    std::array<double, kHiddenDim> dhidden{};
    int idx = kHiddenDim * kInputDim + kHiddenDim;  // start of output_w block
    for (int k = 0; k < kOutputDim; ++k) {
      for (int j = 0; j < kHiddenDim; ++j) {
        grad[idx++] += dlogit[k] * t.hidden[j];
        dhidden[j] += w.output_w[k][j] * dlogit[k];
      }
    }
    for (int k = 0; k < kOutputDim; ++k) grad[idx++] += dlogit[k];

    idx = 0;
    for (int j = 0; j < kHiddenDim; ++j) {
      const double dpre = dhidden[j] * (1.0 - t.hidden[j] * t.hidden[j]);
      for (int i = 0; i < kInputDim; ++i) grad[idx++] += dpre * t.z[i];
    }
    for (int j = 0; j < kHiddenDim; ++j) {
      const double dpre = dhidden[j] * (1.0 - t.hidden[j] * t.hidden[j]);
      grad[idx++] += dpre;
    }
  }
  return loss * inv_n;
}

// --- model file ---------------------------------------------------------------

inline std::string save_model(const MlpWeights& w) {
  nlohmann::json j;
  j["version"] = kModelFormatVersion;
  j["dims"] = {kInputDim, kHiddenDim, kOutputDim};
  auto flat = nlohmann::json::array();
  for (const auto& row : w.hidden_w)
    for (const double v : row) flat.push_back(v);
  j["hidden_weights"] = std::move(flat);
  j["hidden_bias"] = w.hidden_b;
  flat = nlohmann::json::array();
  for (const auto& row : w.output_w)
    for (const double v : row) flat.push_back(v);
  j["output_weights"] = std::move(flat);
  j["output_bias"] = w.output_b;
  j["norm_mean"] = w.norm.mean;
  j["norm_std"] = w.norm.stddev;
  j["training_meta"] = {{"seed", w.meta.seed},
                        {"iterations", w.meta.iterations},
                        {"validation_accuracy", w.meta.validation_accuracy},
                        {"trained", w.meta.trained}};
  return j.dump(2) + "\n";
}

inline MlpWeights load_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("model file is not valid JSON: {}", e.what()));
  }
  try {
    if (!j.contains("version") || j["version"].get<int>() != kModelFormatVersion) {
      throw FormatError("unsupported model file version");
    }
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (dims != std::vector<int>{kInputDim, kHiddenDim, kOutputDim}) {
      throw FormatError(fmt::format("model dimensions [{} {} {}] do not match the {}-{}-{} network",
                                    dims.size() > 0 ? dims[0] : -1, dims.size() > 1 ? dims[1] : -1,
                                    dims.size() > 2 ? dims[2] : -1, kInputDim, kHiddenDim,
                                    kOutputDim));
    }
    const auto hw = j.at("hidden_weights").get<std::vector<double>>();
    const auto hb = j.at("hidden_bias").get<std::vector<double>>();
    const auto ow = j.at("output_weights").get<std::vector<double>>();
    const auto ob = j.at("output_bias").get<std::vector<double>>();
    const auto nm = j.at("norm_mean").get<std::vector<double>>();
    const auto ns = j.at("norm_std").get<std::vector<double>>();
    if (hw.size() != kHiddenDim * kInputDim || hb.size() != kHiddenDim ||
        ow.size() != kOutputDim * kHiddenDim || ob.size() != kOutputDim ||
        nm.size() != kInputDim || ns.size() != kInputDim) {
      throw FormatError("model file has an array of unexpected length");
    }
    MlpWeights w;
    for (int j2 = 0; j2 < kHiddenDim; ++j2)
      for (int i = 0; i < kInputDim; ++i) w.hidden_w[j2][i] = hw[j2 * kInputDim + i];
    std::copy(hb.begin(), hb.end(), w.hidden_b.begin());
    for (int k = 0; k < kOutputDim; ++k)
      for (int j2 = 0; j2 < kHiddenDim; ++j2) w.output_w[k][j2] = ow[k * kHiddenDim + j2];
    std::copy(ob.begin(), ob.end(), w.output_b.begin());
    std::copy(nm.begin(), nm.end(), w.norm.mean.begin());
    std::copy(ns.begin(), ns.end(), w.norm.stddev.begin());
    const auto& meta = j.at("training_meta");
    w.meta.seed = meta.at("seed").get<std::uint64_t>();
    w.meta.iterations = meta.at("iterations").get<int>();
    w.meta.validation_accuracy = meta.at("validation_accuracy").get<double>();
    w.meta.trained = meta.at("trained").get<bool>();

    const auto all_finite = [](std::span<const double> v) {
      for (const double x : v)
        if (!std::isfinite(x)) return false;
      return true;
    };
    if (!all_finite(hw) || !all_finite(hb) || !all_finite(ow) || !all_finite(ob) ||
        !all_finite(nm) || !all_finite(ns)) {
      throw FormatError("model file contains non-finite values");
    }
    for (const double sd : w.norm.stddev) {
      if (!(sd > 0.0)) throw FormatError("model normalization stddev must be positive");
    }
    return w;
  } catch (const FormatError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("model file is structurally invalid: {}", e.what()));
  }
}

inline MlpWeights load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open model file '{}'", path.string()));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_model(text);
}

}  // namespace crowdocean
