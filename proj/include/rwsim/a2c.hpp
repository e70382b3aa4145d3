#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rwsim/mlp.hpp"
#include "rwsim/sched.hpp"

namespace rwsim {

using VecXd = Eigen::VectorXd;
using Mask = std::vector<char>;  // 1 = feasible

struct RewardWeights {
  double tau = 5.0;
  double lambda = 5.0;
};

/// R = phi*R1 + tau*R2 + lambda*R3 with phi = 1 - delay/budget,
/// R1 = [cqi above the cell mean], R2 = [URLLC class],
/// R3 = sinc(pi*floor(delay/budget)) = [delay strictly within budget].
double reward(int cqi_k, double mean_cqi, bool is_urllc, double packet_delay_ms,
              double packet_budget_ms, const RewardWeights& w);

/// Linear decay from epsilon0 to epsilon_min over explore_ttis.
double epsilon_at(long tti, const EpsilonSchedule& s);

/// TD(0) error: r + gamma*V(O') - V(O).
double td_error(double r, double gamma, double v_next, double v_curr);

/// Softmax with masked entries pinned to exactly zero probability.
VecXd masked_softmax(const VecXd& logits, const Mask& mask);

/// Epsilon-greedy over a masked probability vector: explore uniformly over
/// feasible actions, otherwise argmax (ties to the lowest index).
int select_action(const VecXd& probs, const Mask& mask, double epsilon,
                  std::mt19937_64& rng);

// --- observation construction -------------------------------------------

constexpr int kCandidateFeatures = 8;  // cqi, hol, backlog, urllc, one-hot x4
constexpr int kGlobalFeatures = 2;     // assigned fraction, mean cqi
constexpr double kBacklogScaleBits = 16000.0;

inline int observation_size(int candidate_set) {
  return candidate_set * kCandidateFeatures + kGlobalFeatures;
}

/// Indices of the top-M queues by HOL/budget ratio, most urgent first
/// (ties to the lowest ue_id, then lowest qci).
std::vector<std::size_t> build_candidates(const std::vector<QueueView>& queues,
                                          int candidate_set);

/// Fixed-layout observation vector; padded rows stay zero.
VecXd build_observation(const std::vector<QueueView>& queues,
                        const std::vector<std::size_t>& candidates,
                        int candidate_set, double assigned_fraction,
                        double mean_cqi, double urllc_threshold_ms);

/// Feasibility mask over M candidate actions plus the trailing idle action.
Mask build_mask(const std::vector<QueueView>& queues,
                const std::vector<std::size_t>& candidates, int candidate_set);

// --- networks -------------------------------------------------------------

/// Softmax policy head over an MLP; trained by policy gradient.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(int input, const std::vector<int>& hidden, int n_actions,
            std::mt19937_64& rng);

  VecXd probs(const VecXd& obs, const Mask& mask) const;

  /// theta += lr * grad(log pi(a|obs)) * delta.
  void pg_update(const VecXd& obs, const Mask& mask, int action, double delta,
                 double lr);

  /// grad of log pi(a|obs) w.r.t. all parameters, flattened (for checks).
  VecXd log_prob_gradient(const VecXd& obs, const Mask& mask, int action) const;

  MlpD& net() { return net_; }
  const MlpD& net() const { return net_; }

 private:
  MlpD net_;
};

/// State-value estimator; trained on the squared TD error.
class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(int input, const std::vector<int>& hidden, std::mt19937_64& rng);

  double value(const VecXd& obs) const;

  /// One SGD step on delta^2 (delta held fixed as the residual):
  /// theta += 2 * lr * delta * grad V(obs).
  void td_update(const VecXd& obs, double delta, double lr);

  /// grad of delta(theta)^2 at the current parameters, flattened.
  VecXd loss_gradient(const VecXd& obs, double delta) const;

  MlpD& net() { return net_; }
  const MlpD& net() const { return net_; }

 private:
  MlpD net_;
};

// --- agent ----------------------------------------------------------------

/// One actor plus a (possibly shared) critic, coupled through TD(0).
class A2cAgent {
 public:
  A2cAgent() = default;
  A2cAgent(int obs_size, const std::vector<int>& hidden, int n_actions,
           std::shared_ptr<ValueNet> critic, double gamma, double lr_actor,
           double lr_critic, std::mt19937_64& rng);

  int act(const VecXd& obs, const Mask& mask, double epsilon,
          std::mt19937_64& rng) const;

  /// Critic then actor update from one transition. Terminal transitions
  /// pass v_next = 0 via `terminal`.
  double learn(const VecXd& obs, const Mask& mask, int action, double r,
               const VecXd& next_obs, bool terminal = false);

  PolicyNet& actor() { return actor_; }
  ValueNet& critic() { return *critic_; }
  const std::shared_ptr<ValueNet>& critic_ptr() const { return critic_; }

 private:
  PolicyNet actor_;
  std::shared_ptr<ValueNet> critic_;
  double gamma_ = 0.9;
  double lr_actor_ = 0.01;
  double lr_critic_ = 0.05;
};

// --- the scheduler --------------------------------------------------------

/// D-A2C / CDPA-A2C scheduling system: one policy per BS, one critic shared
/// by all of them.
class A2cSystem {
 public:
  A2cSystem(const ScenarioConfig& cfg, std::mt19937_64& init_rng);

  /// Sequential per-RBG decisions with intra-TTI observation updates.
  /// Accumulates training transitions when training() is on.
  RbgMap allocate(int bs_id, const SchedulerInput& input, std::mt19937_64& rng);

  void set_training(bool on) { training_ = on; }
  bool training() const { return training_; }

  /// Reward accumulated by allocate() since the last call, per BS.
  double take_reward(int bs_id);

  void save(const std::string& path) const;
  static A2cSystem load(const std::string& path, const ScenarioConfig& cfg);

  A2cAgent& agent(int bs_id) { return agents_[static_cast<std::size_t>(bs_id)]; }
  int n_bs() const { return static_cast<int>(agents_.size()); }

 private:
  A2cSystem() = default;

  RewardWeights weights_;
  A2cConfig params_;
  int rbg_size_ = 1;
  bool training_ = true;
  std::vector<A2cAgent> agents_;
  std::vector<double> reward_acc_;
};

/// Scheduler facade binding one BS of an A2cSystem to the engine contract.
class A2cBsScheduler : public Scheduler {
 public:
  A2cBsScheduler(A2cSystem* system, int bs_id)
      : system_(system), bs_id_(bs_id) {}

  RbgMap allocate(const SchedulerInput& input, std::mt19937_64& rng) override {
    return system_->allocate(bs_id_, input, rng);
  }

 private:
  A2cSystem* system_;
  int bs_id_;
};

}  // namespace rwsim
