#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "crystalign/core/error.hpp"

namespace crystalign {

struct GrpoConfig {
  int group_size = 8;
  double clip_ratio = 0.2;
  double kl_coef = 0.001;
  double kl_target = 0.05;
  int kl_horizon = 10000;
  // Carried for completeness; the group-relative estimator has no value
  // function, so these are not used.
  double gamma = 0.98;
  double lam = 0.9;
  double advantage_eps = 1e-8;

  void validate() const {
    if (group_size < 2) throw ConfigError("group_size must be at least 2");
    if (!(clip_ratio > 0 && clip_ratio < 1)) throw ConfigError("clip_ratio must lie in (0, 1)");
    if (!(kl_coef >= 0) || !std::isfinite(kl_coef)) throw ConfigError("kl_coef must be finite and non-negative");
    if (!(kl_target > 0)) throw ConfigError("kl_target must be positive");
    if (kl_horizon < 1) throw ConfigError("kl_horizon must be positive");
    if (!(advantage_eps >= 0)) throw ConfigError("advantage_eps must be non-negative");
  }
};

struct Trajectory {
  std::vector<double> logprob_new;
  std::vector<double> logprob_old;
  std::vector<double> logprob_ref;
  double reward = 0.0;
  double advantage = 0.0;
};

struct GrpoBatch {
  std::vector<Trajectory> trajectories;

  void validate(bool need_ref) const {
    if (trajectories.empty()) throw DomainError("empty GRPO batch");
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      const auto& t = trajectories[i];
      if (t.logprob_new.empty()) throw DomainError("trajectory " + std::to_string(i) + " has no tokens");
      if (t.logprob_old.size() != t.logprob_new.size() || (need_ref && t.logprob_ref.size() != t.logprob_new.size()))
        throw DomainError("trajectory " + std::to_string(i) + " has misaligned log-probabilities");
      if (!std::isfinite(t.reward)) throw DomainError("trajectory " + std::to_string(i) + " has a non-finite reward");
    }
  }
};

// (R_i - mean) / std with the population standard deviation; all zeros when
// the spread is below eps.
inline std::vector<double> group_advantages(const std::vector<double>& rewards, double eps = 1e-8) {
  if (rewards.size() < 2) throw DomainError("group advantages need at least 2 rewards");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw DomainError("non-finite reward in group");
    mean += r;
  }
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(rewards.size(), 0.0);
  if (!(sd >= eps) || sd == 0.0) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

// Fills advantages group by group; the batch size must be a multiple of G.
inline void assign_advantages(GrpoBatch& batch, const GrpoConfig& cfg) {
  const auto g = static_cast<std::size_t>(cfg.group_size);
  if (batch.trajectories.size() % g != 0) throw DomainError("batch size is not a multiple of the group size");
  for (std::size_t s = 0; s < batch.trajectories.size(); s += g) {
    std::vector<double> r(g);
    for (std::size_t i = 0; i < g; ++i) r[i] = batch.trajectories[s + i].reward;
    const auto a = group_advantages(r, cfg.advantage_eps);
    for (std::size_t i = 0; i < g; ++i) batch.trajectories[s + i].advantage = a[i];
  }
}

namespace grpo_detail {

inline double ratio(const Trajectory& t, std::size_t i, std::size_t k) {
  const double r = std::exp(t.logprob_new[k] - t.logprob_old[k]);
  if (!std::isfinite(r))
    throw NumericError("non-finite probability ratio in trajectory " + std::to_string(i) + ", token " + std::to_string(k));
  return r;
}

}  // namespace grpo_detail

// Token mean of min(r A, clip(r) A) per trajectory, then the mean over
// trajectories.
inline double clipped_surrogate(const GrpoBatch& batch, double eps_clip) {
  batch.validate(false);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
    const auto& t = batch.trajectories[i];
    double s = 0.0;
    for (std::size_t k = 0; k < t.logprob_new.size(); ++k) {
      const double r = grpo_detail::ratio(t, i, k);
      const double rc = std::clamp(r, 1.0 - eps_clip, 1.0 + eps_clip);
      s += std::min(r * t.advantage, rc * t.advantage);
    }
    total += s / static_cast<double>(t.logprob_new.size());
  }
  return total / static_cast<double>(batch.trajectories.size());
}

// k3 estimator exp(d) - d - 1 with d = ref - new, token mean then trajectory mean.
inline double kl_penalty(const GrpoBatch& batch) {
  batch.validate(true);
  double total = 0.0;
  for (const auto& t : batch.trajectories) {
    double s = 0.0;
    for (std::size_t k = 0; k < t.logprob_new.size(); ++k) {
      const double d = t.logprob_ref[k] - t.logprob_new[k];
      s += std::expm1(d) - d;
    }
    total += s / static_cast<double>(t.logprob_new.size());
  }
  return total / static_cast<double>(batch.trajectories.size());
}

inline double kl_controller_update(double coef, double observed_kl, double target, int horizon, int batch_size) {
  if (!(coef > 0)) throw DomainError("KL coefficient must be positive");
  if (!(target > 0) || horizon < 1 || batch_size < 1) throw DomainError("bad KL controller settings");
  if (!std::isfinite(observed_kl)) throw NumericError("observed KL is not finite");
  const double err = std::clamp((observed_kl - target) / target, -0.2, 0.2);
  return coef * (1.0 + err * batch_size / horizon);
}

inline double grpo_objective(const GrpoBatch& batch, const GrpoConfig& cfg) {
  cfg.validate();
  const double surrogate = clipped_surrogate(batch, cfg.clip_ratio);
  if (cfg.kl_coef == 0.0) return surrogate;
  return surrogate - cfg.kl_coef * kl_penalty(batch);
}

// d objective / d logprob_new for every token, matching grpo_objective.
inline std::vector<std::vector<double>> grpo_logprob_gradient(const GrpoBatch& batch, const GrpoConfig& cfg) {
  batch.validate(cfg.kl_coef != 0.0);
  const double g = static_cast<double>(batch.trajectories.size());
  std::vector<std::vector<double>> out;
  out.reserve(batch.trajectories.size());
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
    const auto& t = batch.trajectories[i];
    const double w = 1.0 / (g * static_cast<double>(t.logprob_new.size()));
    std::vector<double> d(t.logprob_new.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double r = grpo_detail::ratio(t, i, k);
      const double rc = std::clamp(r, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
      // The unclipped branch carries the gradient unless the clipped value is smaller.
      const double ds = rc * t.advantage < r * t.advantage ? 0.0 : r * t.advantage;
      double dk = 0.0;
      if (cfg.kl_coef != 0.0) dk = 1.0 - std::exp(t.logprob_ref[k] - t.logprob_new[k]);
      d[k] = w * (ds - cfg.kl_coef * dk);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace crystalign
