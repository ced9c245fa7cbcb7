#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "crystalign/energetics/backend.hpp"
#include "crystalign/energetics/hull.hpp"
#include "crystalign/grpo/grpo.hpp"
#include "crystalign/rewards/rewards.hpp"
#include "crystalign/validity/checks.hpp"

namespace crystalign {

// Independent categorical distribution per position, parameterized by logits.
class ToyPolicy {
 public:
  ToyPolicy() = default;
  explicit ToyPolicy(const std::vector<std::size_t>& vocab_sizes) {
    for (auto v : vocab_sizes) {
      if (v == 0) throw DomainError("empty vocabulary at a policy position");
      logits_.emplace_back(v, 0.0);
    }
  }

  std::size_t positions() const noexcept { return logits_.size(); }
  std::size_t vocab(std::size_t p) const { return logits_.at(p).size(); }
  std::vector<std::vector<double>>& logits() noexcept { return logits_; }
  const std::vector<std::vector<double>>& logits() const noexcept { return logits_; }

  bool finite() const {
    for (const auto& row : logits_)
      for (double v : row)
        if (!std::isfinite(v)) return false;
    return true;
  }

  std::vector<double> log_probs(std::size_t p) const {
    const auto& row = logits_.at(p);
    double m = row[0];
    for (double v : row) m = std::max(m, v);
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    const double lse = m + std::log(z);
    std::vector<double> out(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) out[k] = row[k] - lse;
    return out;
  }

  std::vector<double> token_logprobs(const std::vector<int>& tokens) const {
    check(tokens);
    std::vector<double> out(tokens.size());
    for (std::size_t p = 0; p < tokens.size(); ++p) out[p] = log_probs(p)[static_cast<std::size_t>(tokens[p])];
    return out;
  }

  template <class Rng>
  std::vector<int> sample(Rng& rng) const {
    std::vector<int> tokens(positions());
    for (std::size_t p = 0; p < positions(); ++p) {
      const auto lp = log_probs(p);
      // 53-bit uniform in [0, 1), independent of the standard library's distributions.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      double acc = 0.0;
      int pick = static_cast<int>(lp.size()) - 1;
      for (std::size_t k = 0; k < lp.size(); ++k) {
        acc += std::exp(lp[k]);
        if (u < acc) {
          pick = static_cast<int>(k);
          break;
        }
      }
      tokens[p] = pick;
    }
    return tokens;
  }

  void check(const std::vector<int>& tokens) const {
    if (tokens.size() != positions()) throw DomainError("token sequence length does not match the policy");
    for (std::size_t p = 0; p < tokens.size(); ++p)
      if (tokens[p] < 0 || static_cast<std::size_t>(tokens[p]) >= vocab(p)) throw DomainError("token out of vocabulary");
  }

 private:
  std::vector<std::vector<double>> logits_;
};

// Gradient of grpo_objective with respect to the logits, for trajectories
// whose token sequences are given and whose logprob_new came from `policy`.
inline std::vector<std::vector<double>> policy_gradient(const ToyPolicy& policy, const std::vector<std::vector<int>>& tokens,
                                                        const GrpoBatch& batch, const GrpoConfig& cfg) {
  if (tokens.size() != batch.trajectories.size()) throw DomainError("token and trajectory counts differ");
  const auto dlp = grpo_logprob_gradient(batch, cfg);
  std::vector<std::vector<double>> grad;
  std::vector<std::vector<double>> probs;
  for (std::size_t p = 0; p < policy.positions(); ++p) {
    grad.emplace_back(policy.vocab(p), 0.0);
    auto lp = policy.log_probs(p);
    for (auto& v : lp) v = std::exp(v);
    probs.push_back(std::move(lp));
  }
  for (std::size_t i = 0; i < tokens.size(); ++i)
    for (std::size_t p = 0; p < tokens[i].size(); ++p) {
      const double g = dlp[i][p];
      for (std::size_t k = 0; k < grad[p].size(); ++k) grad[p][k] -= g * probs[p][k];
      grad[p][static_cast<std::size_t>(tokens[i][p])] += g;
    }
  return grad;
}

// Fills logprob_new for every trajectory from the policy.
inline void refresh_logprobs(const ToyPolicy& policy, const std::vector<std::vector<int>>& tokens, GrpoBatch& batch) {
  for (std::size_t i = 0; i < tokens.size(); ++i) batch.trajectories[i].logprob_new = policy.token_logprobs(tokens[i]);
}

// Single-element cell family: token 0 picks sc/bcc/fcc, token 1 a lattice-constant bin.
struct ToyLatticeTask {
  std::string element = "Cu";
  double a_min = 3.0;   // Angstrom, centre of bin 0
  double a_step = 0.05;
  int bins = 33;

  static constexpr const char* kPrototypes[3] = {"sc", "bcc", "fcc"};

  std::vector<std::size_t> vocab_sizes() const { return {3, static_cast<std::size_t>(bins)}; }
  double lattice_constant(int bin) const { return a_min + a_step * bin; }

  CrystalStructure decode(const std::vector<int>& tokens) const {
    if (tokens.size() != 2 || tokens[0] < 0 || tokens[0] > 2 || tokens[1] < 0 || tokens[1] >= bins)
      throw DomainError("bad toy token sequence");
    const double a = lattice_constant(tokens[1]);
    const Lattice l(a, a, a, 90, 90, 90);
    std::vector<Site> sites{{element, {0, 0, 0}}};
    if (tokens[0] == 1) sites.push_back({element, {0.5, 0.5, 0.5}});
    if (tokens[0] == 2) {
      sites.push_back({element, {0.5, 0.5, 0}});
      sites.push_back({element, {0.5, 0, 0.5}});
      sites.push_back({element, {0, 0.5, 0.5}});
    }
    return CrystalStructure(l, std::move(sites));
  }
};

using StructureReward = std::function<double(const CrystalStructure&)>;

// Full reward stack for a formula-only prompt: validity checks, formation
// energy against the backend references, hull distance, combined reward.
// Toy cells have every site on an inversion centre, so forces vanish and
// relaxation would be the identity; it is skipped.
inline StructureReward make_combined_reward(const EnergyBackend& backend, std::vector<PhaseEntry> phases,
                                            PromptConstraints prompt, RewardWeights w = {}) {
  return [&backend, phases = std::move(phases), prompt = std::move(prompt), w](const CrystalStructure& s) {
    const ValidityReport report = assess_validity(s, prompt);
    std::optional<double> e_hull;
    if (validity_gate(report)) {
      const PhaseEntry cand{s.composition(), formation_energy(backend, s), "candidate"};
      e_hull = energy_above_hull(cand, phases).e_hull;
    }
    return combined_reward(report, e_hull, w).r_target;
  };
}

struct TrainOptions {
  double learning_rate = 0.5;
  int groups_per_iteration = 4;
  int inner_steps = 2;  // gradient steps per sampled batch
};

struct TrainingRecord {
  int iteration = 0;
  double mean_reward = 0.0;      // sampled group mean
  double expected_reward = 0.0;  // exact expectation under the policy
  double kl = 0.0;
  double coef = 0.0;
};

struct TrainingLog {
  std::vector<TrainingRecord> records;
  ToyPolicy policy;

  std::string csv() const {
    std::string out = "iteration,mean_reward,expected_reward,kl,coef\n";
    char buf[160];
    for (const auto& r : records) {
      std::snprintf(buf, sizeof buf, "%d,%.10f,%.10f,%.10e,%.10e\n", r.iteration, r.mean_reward, r.expected_reward, r.kl,
                    r.coef);
      out += buf;
    }
    return out;
  }
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, ToyPolicy last_good) : Error(what), last_(std::move(last_good)) {}
  const ToyPolicy& last_good() const noexcept { return last_; }

 private:
  ToyPolicy last_;
};

// Exact expectation of a per-sequence value over all token sequences.
inline double expected_value(const ToyPolicy& policy, const std::function<double(const std::vector<int>&)>& f) {
  std::vector<std::vector<double>> lp;
  std::size_t total = 1;
  for (std::size_t p = 0; p < policy.positions(); ++p) {
    lp.push_back(policy.log_probs(p));
    total *= lp.back().size();
    if (total > 1'000'000) throw DomainError("policy support too large to enumerate");
  }
  double e = 0.0;
  std::vector<int> tok(policy.positions(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rest = n;
    double l = 0.0;
    for (std::size_t p = policy.positions(); p-- > 0;) {
      tok[p] = static_cast<int>(rest % lp[p].size());
      rest /= lp[p].size();
      l += lp[p][static_cast<std::size_t>(tok[p])];
    }
    e += std::exp(l) * f(tok);
  }
  return e;
}

// On-policy GRPO on the toy task: each iteration samples fresh groups from
// the current policy, normalizes rewards within groups and ascends the
// clipped, KL-regularized objective against the initial policy.
inline TrainingLog train_toy_policy(GrpoConfig cfg, const ToyLatticeTask& task, const StructureReward& reward_fn,
                                    int iterations, std::uint64_t seed, const TrainOptions& opt = {}) {
  cfg.validate();
  if (iterations < 0) throw DomainError("iterations must be non-negative");
  if (opt.groups_per_iteration < 1 || opt.inner_steps < 1) throw ConfigError("bad training options");
  std::mt19937_64 rng(seed);
  TrainingLog log;
  log.policy = ToyPolicy(task.vocab_sizes());
  const ToyPolicy reference = log.policy;

  std::map<std::vector<int>, double> cache;
  auto reward = [&](const std::vector<int>& tok) {
    auto it = cache.find(tok);
    if (it != cache.end()) return it->second;
    const double r = reward_fn(task.decode(tok));
    if (!std::isfinite(r)) throw NumericError("reward function returned a non-finite value");
    cache.emplace(tok, r);
    return r;
  };

  const int n = cfg.group_size * opt.groups_per_iteration;
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::vector<int>> tokens(static_cast<std::size_t>(n));
    GrpoBatch batch;
    batch.trajectories.resize(static_cast<std::size_t>(n));
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      auto& t = batch.trajectories[static_cast<std::size_t>(i)];
      tokens[static_cast<std::size_t>(i)] = log.policy.sample(rng);
      t.logprob_old = log.policy.token_logprobs(tokens[static_cast<std::size_t>(i)]);
      t.logprob_new = t.logprob_old;
      t.logprob_ref = reference.token_logprobs(tokens[static_cast<std::size_t>(i)]);
      t.reward = reward(tokens[static_cast<std::size_t>(i)]);
      mean += t.reward;
    }
    assign_advantages(batch, cfg);
    TrainingRecord rec;
    rec.iteration = it;
    rec.mean_reward = mean / n;
    rec.expected_reward = expected_value(log.policy, reward);
    rec.kl = kl_penalty(batch);
    rec.coef = cfg.kl_coef;
    log.records.push_back(rec);

    const ToyPolicy last_good = log.policy;
    for (int step = 0; step < opt.inner_steps; ++step) {
      if (step > 0) refresh_logprobs(log.policy, tokens, batch);
      const auto grad = policy_gradient(log.policy, tokens, batch, cfg);
      auto& logits = log.policy.logits();
      for (std::size_t p = 0; p < logits.size(); ++p)
        for (std::size_t k = 0; k < logits[p].size(); ++k) logits[p][k] += opt.learning_rate * grad[p][k];
      if (!log.policy.finite())
        throw TrainingError("policy logits diverged at iteration " + std::to_string(it), last_good);
    }
    if (cfg.kl_coef > 0)
      cfg.kl_coef = kl_controller_update(cfg.kl_coef, rec.kl, cfg.kl_target, cfg.kl_horizon, n);
  }
  return log;
}

// Most probable token sequence (argmax per position; positions are independent).
inline std::vector<int> modal_tokens(const ToyPolicy& policy) {
  std::vector<int> out;
  for (const auto& row : policy.logits())
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  return out;
}

}  // namespace crystalign
