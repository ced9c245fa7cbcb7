#include <gtest/gtest.h>

#include <random>

#include "crystalign/grpo/grpo.hpp"
#include "crystalign/grpo/toy.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace crystalign;

namespace {

Trajectory one_token(double lnew, double lold, double adv) {
  Trajectory t;
  t.logprob_new = {lnew};
  t.logprob_old = {lold};
  t.logprob_ref = {lold};
  t.advantage = adv;
  return t;
}

}  // namespace

TEST(Advantages, ReferenceGroup) {
  const auto a = group_advantages({1, 2, 3});
  EXPECT_NEAR(a[0], -1.224745, 1e-6);
  EXPECT_NEAR(a[1], 0.0, 1e-6);
  EXPECT_NEAR(a[2], 1.224745, 1e-6);
}

TEST(Advantages, ConstantGroupGivesZeros) {
  for (double v : group_advantages({2, 2, 2, 2})) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(group_advantages({1}), DomainError);
}

TEST(AdvantagesProperty, ZeroMeanUnitSpread) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(8);
    for (auto& v : r) v = fixtures::uniform(rng, -5, 5);
    const auto a = group_advantages(r);
    double m = 0, s = 0;
    for (double v : a) m += v;
    for (double v : a) s += v * v;
    EXPECT_NEAR(m / 8, 0.0, 1e-12);
    EXPECT_NEAR(s / 8, 1.0, 1e-6);
  }
}

TEST(Surrogate, ClipExamples) {
  GrpoBatch b;
  b.trajectories = {one_token(std::log(2.0), 0.0, 1.0)};
  EXPECT_NEAR(clipped_surrogate(b, 0.2), 1.2, 1e-12);
  b.trajectories = {one_token(std::log(0.5), 0.0, -1.0)};
  EXPECT_NEAR(clipped_surrogate(b, 0.2), -0.8, 1e-12);
}

TEST(SurrogateProperty, OnPolicyEqualsMeanAdvantage) {
  std::mt19937_64 rng(4);
  GrpoBatch b;
  double mean = 0;
  for (int i = 0; i < 16; ++i) {
    const double lp = fixtures::uniform(rng, -3, 0), adv = fixtures::uniform(rng, -2, 2);
    b.trajectories.push_back(one_token(lp, lp, adv));
    mean += adv;
  }
  EXPECT_DOUBLE_EQ(clipped_surrogate(b, 0.2), mean / 16);
}

TEST(Surrogate, NonFiniteRatioRaises) {
  GrpoBatch b;
  b.trajectories = {one_token(800.0, 0.0, 1.0)};
  EXPECT_THROW(clipped_surrogate(b, 0.2), NumericError);
}

TEST(Kl, ZeroWhenPoliciesAgreeAndNonNegative) {
  GrpoBatch b;
  b.trajectories = {one_token(-1.0, -1.0, 0.0)};
  EXPECT_EQ(kl_penalty(b), 0.0);
  b.trajectories[0].logprob_ref = {-0.2};
  EXPECT_GT(kl_penalty(b), 0.0);
}

TEST(Objective, ZeroCoefficientIsTheSurrogate) {
  GrpoBatch b;
  b.trajectories = {one_token(-0.5, -1.0, 1.0), one_token(-1.5, -1.0, -1.0)};
  b.trajectories[0].logprob_ref = {-2.0};
  GrpoConfig c;
  c.kl_coef = 0.0;
  EXPECT_DOUBLE_EQ(grpo_objective(b, c), clipped_surrogate(b, c.clip_ratio));
}

TEST(Controller, MovesTowardTarget) {
  EXPECT_GT(kl_controller_update(0.001, 0.2, 0.05, 10000, 32), 0.001);
  EXPECT_LT(kl_controller_update(0.001, 0.0, 0.05, 10000, 32), 0.001);
  EXPECT_THROW(kl_controller_update(0.0, 0.1, 0.05, 10000, 32), DomainError);
}

TEST(Config, Validation) {
  GrpoConfig c;
  c.group_size = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.clip_ratio = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

// Oracle: central finite differences of grpo_objective in the logits.
TEST(GradientOracle, MatchesFiniteDifferences) {
  std::mt19937_64 rng(2025);
  GrpoConfig cfg;
  cfg.group_size = 4;
  cfg.kl_coef = 0.05;
  int points = 0;
  while (points < 20) {
    ToyPolicy pol({3, 5});
    ToyPolicy old({3, 5}), ref({3, 5});
    for (auto* p : {&pol, &old, &ref})
      for (auto& row : p->logits())
        for (auto& v : row) v = fixtures::uniform(rng, -1, 1);
    std::vector<std::vector<int>> tokens;
    GrpoBatch b;
    for (int i = 0; i < 8; ++i) {
      tokens.push_back(old.sample(rng));
      Trajectory t;
      t.logprob_old = old.token_logprobs(tokens.back());
      t.logprob_ref = ref.token_logprobs(tokens.back());
      t.logprob_new = pol.token_logprobs(tokens.back());
      t.reward = fixtures::uniform(rng, 0, 10);
      b.trajectories.push_back(t);
    }
    assign_advantages(b, cfg);
    // Skip points sitting within FD reach of a clip boundary.
    bool near_kink = false;
    for (const auto& t : b.trajectories)
      for (std::size_t k = 0; k < t.logprob_new.size(); ++k) {
        const double r = std::exp(t.logprob_new[k] - t.logprob_old[k]);
        near_kink = near_kink || std::fabs(r - 1 - cfg.clip_ratio) < 1e-3 || std::fabs(r - 1 + cfg.clip_ratio) < 1e-3;
      }
    if (near_kink) continue;
    auto objective = [&](const ToyPolicy& p) {
      GrpoBatch c = b;
      refresh_logprobs(p, tokens, c);
      return grpo_objective(c, cfg);
    };
    const auto g = policy_gradient(pol, tokens, b, cfg);
    const double h = 1e-6;
    for (std::size_t p = 0; p < pol.positions(); ++p)
      for (std::size_t k = 0; k < pol.vocab(p); ++k) {
        ToyPolicy up = pol, dn = pol;
        up.logits()[p][k] += h;
        dn.logits()[p][k] -= h;
        const double fd = (objective(up) - objective(dn)) / (2 * h);
        EXPECT_NEAR(g[p][k], fd, 1e-4 * std::max(1.0, std::fabs(fd))) << "point " << points;
      }
    ++points;
  }
}

// Oracle: the sampled k3 estimate approaches the exact KL.
TEST(KlOracle, EstimatorMatchesExactDivergence) {
  std::mt19937_64 rng(5);
  ToyPolicy pnew({4, 6}), pref({4, 6});
  for (auto* p : {&pnew, &pref})
    for (auto& row : p->logits())
      for (auto& v : row) v = fixtures::uniform(rng, -1, 1);
  GrpoBatch b;
  for (int i = 0; i < 200000; ++i) {
    const auto tok = pnew.sample(rng);
    Trajectory t;
    t.logprob_new = pnew.token_logprobs(tok);
    t.logprob_old = t.logprob_new;
    t.logprob_ref = pref.token_logprobs(tok);
    b.trajectories.push_back(std::move(t));
  }
  const double exact = oracles::exact_token_kl(pnew, pref);
  EXPECT_NEAR(kl_penalty(b), exact, 0.05 * exact);
}

TEST(ToyPolicy, SamplingFollowsProbabilities) {
  ToyPolicy p({3});
  p.logits()[0] = {0.0, std::log(2.0), std::log(3.0)};
  std::mt19937_64 rng(6);
  std::array<int, 3> n{};
  for (int i = 0; i < 60000; ++i) ++n[p.sample(rng)[0]];
  EXPECT_NEAR(n[0] / 60000.0, 1 / 6.0, 0.01);
  EXPECT_NEAR(n[2] / 60000.0, 0.5, 0.01);
}

TEST(ToyTask, DecodesPrototypes) {
  ToyLatticeTask t;
  EXPECT_EQ(t.decode({0, 0}).size(), 1u);
  EXPECT_EQ(t.decode({1, 0}).size(), 2u);
  EXPECT_EQ(t.decode({2, 12}).size(), 4u);
  EXPECT_NEAR(t.decode({2, 12}).lattice().lengths()[0], 3.6, 1e-12);
  EXPECT_THROW(t.decode({3, 0}), DomainError);
}

TEST(ToyTraining, ImprovesAndIsReproducible) {
  const PairPotentialBackend backend;
  const ToyLatticeTask task;
  PromptConstraints prompt;
  prompt.formula = parse_formula("Cu");
  const auto reward = make_combined_reward(backend, builtin_phases(), prompt);
  const auto a = train_toy_policy(GrpoConfig{}, task, reward, 60, 7);
  const auto b = train_toy_policy(GrpoConfig{}, task, reward, 60, 7);
  EXPECT_EQ(a.csv(), b.csv());
  EXPECT_GT(a.records.back().expected_reward, a.records.front().expected_reward);
}

TEST(ToyTraining, DivergenceRaisesWithLastGoodPolicy) {
  const ToyLatticeTask task;
  GrpoConfig cfg;
  TrainOptions opt;
  opt.learning_rate = 1e308;
  int calls = 0;
  const StructureReward reward = [&](const CrystalStructure& s) { return static_cast<double>(s.size()) + (calls++ % 3); };
  try {
    train_toy_policy(cfg, task, reward, 20, 1, opt);
    FAIL() << "expected divergence";
  } catch (const TrainingError& e) {
    EXPECT_TRUE(e.last_good().finite());
  }
}
