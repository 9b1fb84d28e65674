#pragma once

#include <gne/graph.hpp>
#include <gne/rng.hpp>
#include <gne/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace gne {

/// Which agent wakes up at each tick.
struct ActivationModel {
  enum class Mode { iid, round_robin };

  Mode mode = Mode::iid;
  std::vector<double> probabilities;  // iid
  std::vector<Index> order;           // round_robin
  std::uint64_t seed = 0;

  static ActivationModel uniform(Index num_agents, std::uint64_t seed) {
    if (num_agents < 1) throw InvalidParameter("activation model needs at least one agent");
    return iid(std::vector<double>(static_cast<std::size_t>(num_agents), 1.0 / static_cast<double>(num_agents)), seed);
  }

  static ActivationModel iid(std::vector<double> p, std::uint64_t seed) {
    if (p.empty()) throw InvalidParameter("activation probabilities are empty");
    double total = 0.0;
    for (double v : p) {
      if (!(v > 0.0)) throw InvalidParameter("activation probabilities must be positive");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("activation probabilities must sum to 1");
    ActivationModel m;
    m.mode = Mode::iid;
    m.probabilities = std::move(p);
    m.seed = seed;
    return m;
  }

  static ActivationModel round_robin(std::vector<Index> order) {
    std::vector<Index> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != static_cast<Index>(i)) throw InvalidParameter("round-robin order must be a permutation of 0..N-1");
    }
    if (order.empty()) throw InvalidParameter("round-robin order is empty");
    ActivationModel m;
    m.mode = Mode::round_robin;
    m.order = std::move(order);
    return m;
  }

  static ActivationModel round_robin(Index num_agents) {
    std::vector<Index> order(static_cast<std::size_t>(num_agents));
    for (Index i = 0; i < num_agents; ++i) order[static_cast<std::size_t>(i)] = i;
    return round_robin(std::move(order));
  }

  Index num_agents() const {
    return static_cast<Index>(mode == Mode::iid ? probabilities.size() : order.size());
  }

  /// Smallest activation frequency; 1/N for round robin.
  double p_min() const {
    if (mode == Mode::round_robin) return 1.0 / static_cast<double>(order.size());
    return *std::min_element(probabilities.begin(), probabilities.end());
  }
};

class ActivationSampler {
 public:
  explicit ActivationSampler(ActivationModel model) : model_(std::move(model)), rng_(model_.seed) {
    double acc = 0.0;
    for (double p : model_.probabilities) {
      acc += p;
      cumulative_.push_back(acc);
    }
    if (!cumulative_.empty()) cumulative_.back() = 1.0;
  }

  /// Agent active at tick k. iid draws consume one value of the stream per call.
  Index next(Index k) {
    if (model_.mode == ActivationModel::Mode::round_robin) {
      return model_.order[static_cast<std::size_t>(k % static_cast<Index>(model_.order.size()))];
    }
    return static_cast<Index>(rng_.pick(cumulative_));
  }

  const ActivationModel& model() const { return model_; }

 private:
  ActivationModel model_;
  Rng rng_;
  std::vector<double> cumulative_;
};

/// Staleness of neighbor information, in ticks. An agent always sees its own
/// variables fresh.
struct DelayModel {
  enum class Mode { zero, fixed, uniform };

  Mode mode = Mode::zero;
  int bound = 0;
  std::uint64_t seed = 0;

  static DelayModel zero() { return {}; }

  static DelayModel fixed(int delay) {
    if (delay < 0) throw InvalidParameter("delay must be non-negative");
    return {Mode::fixed, delay, 0};
  }

  static DelayModel uniform(int max_delay, std::uint64_t seed) {
    if (max_delay < 0) throw InvalidParameter("delay bound must be non-negative");
    return {Mode::uniform, max_delay, seed};
  }

  int max_delay() const { return mode == Mode::zero ? 0 : bound; }
};

class DelaySampler {
 public:
  explicit DelaySampler(DelayModel model) : model_(model), rng_(model.seed) {}

  int sample() {
    switch (model_.mode) {
      case DelayModel::Mode::zero:
        return 0;
      case DelayModel::Mode::fixed:
        return model_.bound;
      case DelayModel::Mode::uniform:
        return static_cast<int>(rng_.below(static_cast<std::uint64_t>(model_.bound) + 1));
    }
    return 0;
  }

  const DelayModel& model() const { return model_; }

 private:
  DelayModel model_;
  Rng rng_;
};

/// One tick: the active agent and the delay of each neighbor's data, listed in
/// ascending neighbor order.
struct ScheduleEntry {
  Index agent = 0;
  std::vector<int> delays;

  bool operator==(const ScheduleEntry&) const = default;
};

class ScheduleSource {
 public:
  virtual ~ScheduleSource() = default;
  virtual void next(Index k, ScheduleEntry& out) = 0;
  virtual int max_delay() const = 0;
  /// Ticks available; negative when unbounded.
  virtual Index length() const { return -1; }
};

class ModelSchedule final : public ScheduleSource {
 public:
  ModelSchedule(const CommGraph& graph, ActivationModel activation, DelayModel delays)
      : graph_(&graph), activation_(std::move(activation)), delays_(delays) {
    if (activation_.model().num_agents() != graph.num_nodes()) throw InvalidParameter("activation model size differs from N");
  }

  void next(Index k, ScheduleEntry& out) override {
    out.agent = activation_.next(k);
    const auto deg = static_cast<std::size_t>(graph_->degree(out.agent));
    out.delays.resize(deg);
    for (auto& d : out.delays) d = delays_.sample();
  }

  int max_delay() const override { return delays_.model().max_delay(); }

 private:
  const CommGraph* graph_;
  ActivationSampler activation_;
  DelaySampler delays_;
};

/// Plays back a recorded schedule.
class ReplaySchedule final : public ScheduleSource {
 public:
  ReplaySchedule(const CommGraph& graph, std::vector<ScheduleEntry> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_) {
      if (e.agent < 0 || e.agent >= graph.num_nodes()) throw InvalidParameter("replay: agent index out of range");
      if (static_cast<Index>(e.delays.size()) != graph.degree(e.agent)) {
        throw InvalidParameter("replay: delay count differs from the agent's degree");
      }
      for (int d : e.delays) {
        if (d < 0) throw InvalidParameter("replay: negative delay");
        max_delay_ = std::max(max_delay_, d);
      }
    }
  }

  void next(Index k, ScheduleEntry& out) override {
    if (k < 0 || k >= length()) throw InvalidParameter("replay schedule exhausted at tick " + std::to_string(k));
    out = entries_[static_cast<std::size_t>(k)];
  }

  int max_delay() const override { return max_delay_; }
  Index length() const override { return static_cast<Index>(entries_.size()); }

 private:
  std::vector<ScheduleEntry> entries_;
  int max_delay_ = 0;
};

}  // namespace gne
