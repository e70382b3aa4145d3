#include "rwsim/a2c.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rwsim {

double reward(int cqi_k, double mean_cqi, bool is_urllc, double packet_delay_ms,
              double packet_budget_ms, const RewardWeights& w) {
  const double diff = static_cast<double>(cqi_k) - mean_cqi;
  const double r1 = diff > 0 ? 1.0 : 0.0;  // max(sgn(.), 0)
  const double r2 = is_urllc ? 1.0 : 0.0;
  const long n = static_cast<long>(std::floor(packet_delay_ms / packet_budget_ms));
  const double r3 = (n == 0) ? 1.0 : 0.0;  // sinc(pi*n)
  const double phi = 1.0 - packet_delay_ms / packet_budget_ms;
  return phi * r1 + w.tau * r2 + w.lambda * r3;
}

double epsilon_at(long tti, const EpsilonSchedule& s) {
  if (s.explore_ttis <= 0 || tti >= s.explore_ttis) return s.epsilon_min;
  const double frac = static_cast<double>(tti) / static_cast<double>(s.explore_ttis);
  return s.epsilon0 + (s.epsilon_min - s.epsilon0) * frac;
}

double td_error(double r, double gamma, double v_next, double v_curr) {
  return r + gamma * v_next - v_curr;
}

VecXd masked_softmax(const VecXd& logits, const Mask& mask) {
  VecXd probs = VecXd::Zero(logits.size());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask[static_cast<std::size_t>(i)] && logits[i] > max_logit)
      max_logit = logits[i];
  double sum = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  probs /= sum;
  return probs;
}

int select_action(const VecXd& probs, const Mask& mask, double epsilon,
                  std::mt19937_64& rng) {
  std::vector<int> feasible;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) feasible.push_back(static_cast<int>(i));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (epsilon > 0 && u(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
    return feasible[pick(rng)];
  }
  int best = feasible.front();
  for (int i : feasible)
    if (probs[i] > probs[best]) best = i;
  return best;
}

std::vector<std::size_t> build_candidates(const std::vector<QueueView>& queues,
                                          int candidate_set) {
  std::vector<std::size_t> order(queues.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ua = queues[a].hol_ms / queues[a].delay_budget_ms;
    const double ub = queues[b].hol_ms / queues[b].delay_budget_ms;
    if (ua != ub) return ua > ub;
    if (queues[a].ue_id != queues[b].ue_id) return queues[a].ue_id < queues[b].ue_id;
    return queues[a].qci < queues[b].qci;
  });
  if (order.size() > static_cast<std::size_t>(candidate_set))
    order.resize(static_cast<std::size_t>(candidate_set));
  return order;
}

VecXd build_observation(const std::vector<QueueView>& queues,
                        const std::vector<std::size_t>& candidates,
                        int candidate_set, double assigned_fraction,
                        double mean_cqi, double urllc_threshold_ms) {
  VecXd obs = VecXd::Zero(observation_size(candidate_set));
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto& q = queues[candidates[j]];
    const Eigen::Index base = static_cast<Eigen::Index>(j) * kCandidateFeatures;
    obs[base + 0] = q.cqi / 15.0;
    obs[base + 1] = q.hol_ms / q.delay_budget_ms;
    obs[base + 2] = std::min(static_cast<double>(q.backlog_bits) /
                                 kBacklogScaleBits, 1.0);
    obs[base + 3] = q.delay_budget_ms <= urllc_threshold_ms ? 1.0 : 0.0;
    int label_slot = 0;
    switch (q.label) {
      case ServiceLabel::Voice: label_slot = 0; break;
      case ServiceLabel::IMS: label_slot = 1; break;
      case ServiceLabel::Video: label_slot = 2; break;
      case ServiceLabel::V2X: label_slot = 3; break;
    }
    obs[base + 4 + label_slot] = 1.0;
  }
  obs[observation_size(candidate_set) - 2] = assigned_fraction;
  obs[observation_size(candidate_set) - 1] = mean_cqi / 15.0;
  return obs;
}

Mask build_mask(const std::vector<QueueView>& queues,
                const std::vector<std::size_t>& candidates, int candidate_set) {
  Mask mask(static_cast<std::size_t>(candidate_set) + 1, 0);
  for (std::size_t j = 0; j < candidates.size(); ++j)
    if (queues[candidates[j]].backlog_bits > 0) mask[j] = 1;
  mask.back() = 1;  // idle is always feasible
  return mask;
}

namespace {

std::vector<int> layer_sizes(int input, const std::vector<int>& hidden,
                             int output) {
  std::vector<int> sizes;
  sizes.push_back(input);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

// Clip the global gradient norm; unbounded policy-gradient steps can
// feed back through the ReLU stack and blow the weights up.
constexpr double kMaxGradNorm = 5.0;

double clip_scale(const MlpD::Gradients& g) {
  double sq = 0;
  for (const auto& w : g.dw) sq += w.squaredNorm();
  for (const auto& b : g.db) sq += b.squaredNorm();
  const double norm = std::sqrt(sq);
  return norm > kMaxGradNorm ? kMaxGradNorm / norm : 1.0;
}

}  // namespace

PolicyNet::PolicyNet(int input, const std::vector<int>& hidden, int n_actions,
                     std::mt19937_64& rng)
    : net_(layer_sizes(input, hidden, n_actions), rng) {}

VecXd PolicyNet::probs(const VecXd& obs, const Mask& mask) const {
  return masked_softmax(net_.forward(obs), mask);
}

void PolicyNet::pg_update(const VecXd& obs, const Mask& mask, int action,
                          double delta, double lr) {
  if (delta == 0) return;
  MlpD::Tape tape;
  const VecXd logits = net_.forward(obs, tape);
  const VecXd p = masked_softmax(logits, mask);
  // d log pi(a) / d logits = onehot(a) - p, zero on masked entries
  VecXd grad_logits = -p;
  grad_logits[action] += 1.0;
  for (Eigen::Index i = 0; i < grad_logits.size(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) grad_logits[i] = 0;
  const auto grads = net_.backward(tape, grad_logits);
  net_.apply(grads, clip_scale(grads) * lr * delta);
}

VecXd PolicyNet::log_prob_gradient(const VecXd& obs, const Mask& mask,
                                   int action) const {
  MlpD::Tape tape;
  const VecXd logits = net_.forward(obs, tape);
  const VecXd p = masked_softmax(logits, mask);
  VecXd grad_logits = -p;
  grad_logits[action] += 1.0;
  for (Eigen::Index i = 0; i < grad_logits.size(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) grad_logits[i] = 0;
  return MlpD::flatten_gradients(net_.backward(tape, grad_logits));
}

ValueNet::ValueNet(int input, const std::vector<int>& hidden,
                   std::mt19937_64& rng)
    : net_(layer_sizes(input, hidden, 1), rng) {}

double ValueNet::value(const VecXd& obs) const { return net_.forward(obs)[0]; }

void ValueNet::td_update(const VecXd& obs, double delta, double lr) {
  if (delta == 0) return;
  MlpD::Tape tape;
  net_.forward(obs, tape);
  VecXd grad_out(1);
  grad_out[0] = 1.0;
  const auto grads = net_.backward(tape, grad_out);
  // descend on delta^2: theta -= lr * (-2 delta grad V)
  net_.apply(grads, clip_scale(grads) * 2.0 * lr * delta);
}

VecXd ValueNet::loss_gradient(const VecXd& obs, double delta) const {
  MlpD::Tape tape;
  net_.forward(obs, tape);
  VecXd grad_out(1);
  grad_out[0] = -2.0 * delta;
  return MlpD::flatten_gradients(net_.backward(tape, grad_out));
}

A2cAgent::A2cAgent(int obs_size, const std::vector<int>& hidden, int n_actions,
                   std::shared_ptr<ValueNet> critic, double gamma,
                   double lr_actor, double lr_critic, std::mt19937_64& rng)
    : actor_(obs_size, hidden, n_actions, rng),
      critic_(std::move(critic)),
      gamma_(gamma),
      lr_actor_(lr_actor),
      lr_critic_(lr_critic) {}

int A2cAgent::act(const VecXd& obs, const Mask& mask, double epsilon,
                  std::mt19937_64& rng) const {
  return select_action(actor_.probs(obs, mask), mask, epsilon, rng);
}

double A2cAgent::learn(const VecXd& obs, const Mask& mask, int action, double r,
                       const VecXd& next_obs, bool terminal) {
  const double v_curr = critic_->value(obs);
  const double v_next = terminal ? 0.0 : critic_->value(next_obs);
  const double delta = td_error(r, gamma_, v_next, v_curr);
  critic_->td_update(obs, delta, lr_critic_);
  actor_.pg_update(obs, mask, action, delta, lr_actor_);
  return delta;
}

A2cSystem::A2cSystem(const ScenarioConfig& cfg, std::mt19937_64& init_rng) {
  weights_ = {cfg.a2c.tau, cfg.a2c.lambda};
  params_ = cfg.a2c;
  rbg_size_ = cfg.rbg_size;
  const int obs = observation_size(params_.candidate_set);
  const int n_actions = params_.candidate_set + 1;
  auto critic = std::make_shared<ValueNet>(obs, params_.hidden_layers, init_rng);
  for (int b = 0; b < cfg.n_bs; ++b) {
    agents_.emplace_back(obs, params_.hidden_layers, n_actions, critic,
                         params_.gamma, params_.lr_actor, params_.lr_critic,
                         init_rng);
  }
  reward_acc_.assign(static_cast<std::size_t>(cfg.n_bs), 0.0);
}

RbgMap A2cSystem::allocate(int bs_id, const SchedulerInput& input,
                           std::mt19937_64& rng) {
  RbgMap map(input.tti, input.n_rbg);
  auto& agent = agents_.at(static_cast<std::size_t>(bs_id));

  // Working copies: backlogs shrink as RBGs are granted within the TTI.
  std::vector<QueueView> views = input.queues;
  const auto candidates = build_candidates(views, params_.candidate_set);
  const int M = params_.candidate_set;
  const double eps =
      training_ ? epsilon_at(input.tti, params_.epsilon) : 0.0;

  for (int rbg = 0; rbg < input.n_rbg; ++rbg) {
    const double frac = static_cast<double>(rbg) / input.n_rbg;
    const VecXd obs =
        build_observation(views, candidates, M, frac, input.mean_cqi,
                          params_.urllc_threshold_ms);
    const Mask mask = build_mask(views, candidates, M);
    const int action = agent.act(obs, mask, eps, rng);

    double r = 0.0;
    if (action < M && mask[static_cast<std::size_t>(action)]) {
      auto& q = views[candidates[static_cast<std::size_t>(action)]];
      const bool urllc = q.delay_budget_ms <= params_.urllc_threshold_ms;
      r = reward(q.cqi, input.mean_cqi, urllc, q.hol_ms, q.delay_budget_ms,
                 weights_);
      map.assignments[rbg] = std::make_pair(q.ue_id, q.qci);
      q.backlog_bits -= tb_bits(q.cqi, 1, input.rbg_size, *input.table);
    }
    reward_acc_[static_cast<std::size_t>(bs_id)] += r;

    if (training_) {
      const double next_frac = static_cast<double>(rbg + 1) / input.n_rbg;
      const VecXd next_obs =
          build_observation(views, candidates, M, next_frac, input.mean_cqi,
                            params_.urllc_threshold_ms);
      agent.learn(obs, mask, action, r, next_obs);
    }
  }
  return map;
}

double A2cSystem::take_reward(int bs_id) {
  double r = reward_acc_.at(static_cast<std::size_t>(bs_id));
  reward_acc_[static_cast<std::size_t>(bs_id)] = 0.0;
  return r;
}

namespace {
constexpr char kCheckpointMagic[8] = {'R', 'W', 'A', '2', 'C', 'K', '0', '1'};
}

void A2cSystem::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::int32_t n_bs_v = static_cast<std::int32_t>(agents_.size());
  out.write(reinterpret_cast<const char*>(&n_bs_v), sizeof(n_bs_v));
  agents_.front().critic_ptr()->net().save(out);
  for (const auto& a : agents_) {
    // actors hold separate parameters; the critic is written once above
    const_cast<A2cAgent&>(a).actor().net().save(out);
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

A2cSystem A2cSystem::load(const std::string& path, const ScenarioConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw std::runtime_error("checkpoint version mismatch: " + path);
  std::int32_t n_bs_v = 0;
  in.read(reinterpret_cast<char*>(&n_bs_v), sizeof(n_bs_v));
  if (!in || n_bs_v != cfg.n_bs)
    throw std::runtime_error("checkpoint BS count mismatch: " + path);

  std::mt19937_64 dummy(0);
  A2cSystem sys(cfg, dummy);
  auto critic = std::make_shared<ValueNet>();
  critic->net() = MlpD::load(in);
  for (auto& agent : sys.agents_) {
    A2cAgent fresh(critic->net().input_size(), cfg.a2c.hidden_layers,
                   cfg.a2c.candidate_set + 1, critic, cfg.a2c.gamma,
                   cfg.a2c.lr_actor, cfg.a2c.lr_critic, dummy);
    fresh.actor().net() = MlpD::load(in);
    agent = fresh;
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return sys;
}

}  // namespace rwsim
