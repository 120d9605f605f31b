#include "uwmarl/engine.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <thread>

#include "uwmarl/comms.hpp"

namespace uwmarl {

void EngineConfig::validate() const {
  if (num_agents < 1) throw ConfigError("at least one agent is required");
  temperature.validate();
  learning_rate.validate();
  if (learning_rate.v_max > 1.0) throw ConfigError("learning rate must not exceed 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (convergence_window < 1) throw ConfigError("convergence window must be positive");
  if (max_steps <= static_cast<std::uint64_t>(convergence_window)) {
    throw ConfigError("max steps must exceed the convergence window");
  }
  if (!(value_eps > 0.0)) throw ConfigError("value epsilon must be positive");
  if (traffic == TrafficMode::Underwater && underwater_window < 1) {
    throw ConfigError("underwater window must be at least one round");
  }
  if (!start_positions.empty() && start_positions.size() != static_cast<std::size_t>(num_agents)) {
    throw ConfigError("start positions must list one cell per agent");
  }
  if (!(seconds_per_step >= 0.0)) throw ConfigError("seconds per step must be non-negative");
}

Grid<Action> greedy_policy(const QSnapshot& q, const GridWorld& world) {
  Grid<Action> out(world.rows(), world.cols(), Action::Left);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const GridPos s = out.pos(i);
    const QRow row = q.row(s);
    std::size_t best = 0;
    for (std::size_t a = 1; a < kActionCount; ++a) {
      if (row[a] > row[best]) best = a;
    }
    out[s] = world.canonical(s, kActions[best]);
  }
  return out;
}

bool policy_converged(std::span<const Grid<Action>> history, int window) {
  if (window < 1 || history.size() < static_cast<std::size_t>(window)) return false;
  const auto& last = history.back();
  for (std::size_t k = history.size() - static_cast<std::size_t>(window); k < history.size(); ++k) {
    if (!(history[k] == last)) return false;
  }
  return true;
}

bool value_converged(std::span<const double> deltas, std::size_t window, double eps) {
  if (window == 0 || deltas.size() < window) return false;
  return std::all_of(deltas.end() - static_cast<std::ptrdiff_t>(window), deltas.end(),
                     [eps](double d) { return d < eps; });
}

Grid<double> visit_percentages(const Grid<std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw std::invalid_argument("visit_percentages: no visits recorded");
  Grid<double> out(counts.rows(), counts.cols(), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.values()[i] = static_cast<double>(counts.values()[i]) / static_cast<double>(total) * 100.0;
  }
  return out;
}

std::vector<GridPos> random_start_positions(int rows, int cols, int count, Rng& rng) {
  const int cells = rows * cols;
  std::vector<int> order(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) order[static_cast<std::size_t>(i)] = i;

  std::vector<GridPos> out;
  out.reserve(static_cast<std::size_t>(count));
  const int distinct = std::min(count, cells);
  for (int i = 0; i < distinct; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(cells - 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
    out.push_back({order[static_cast<std::size_t>(i)] / cols, order[static_cast<std::size_t>(i)] % cols});
  }
  for (int i = distinct; i < count; ++i) {
    const auto k = static_cast<int>(rng.uniform_int(0, static_cast<std::uint64_t>(cells - 1)));
    out.push_back({k / cols, k % cols});
  }
  return out;
}

namespace {

constexpr std::uint64_t kStartStream = 0x5354415254ULL;  // "START"

class Runner {
 public:
  Runner(const RewardField& field, const EngineConfig& cfg)
      : field_(field),
        cfg_(cfg),
        world_(field.rows(), field.cols()),
        table_(field.rows(), field.cols()),
        visits_(field.rows(), field.cols(), 0) {
    if (cfg.traffic == TrafficMode::Underwater) {
      view_ = std::make_unique<comms::BatchedQStore>(table_, cfg.num_agents, cfg.underwater_window);
    } else {
      view_ = std::make_unique<DirectQView>(table_);
    }

    std::vector<GridPos> starts = cfg.start_positions;
    if (starts.empty()) {
      Rng placement(derive_seed(cfg.seed, kStartStream));
      starts = random_start_positions(world_.rows(), world_.cols(), cfg.num_agents, placement);
    }
    const double energy = cfg.energy_budget ? static_cast<double>(*cfg.energy_budget)
                                            : std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.num_agents; ++i) {
      const GridPos p = starts[static_cast<std::size_t>(i)];
      if (!world_.contains(p)) throw ConfigError("start position " + to_string(p) + " is outside the grid");
      agents_.push_back(AgentState{i, p, energy, 0.0, Rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i) + 1))});
    }
    agent_steps_.assign(agents_.size(), 0);
    agent_delta_.assign(agents_.size(), 0.0);
    agent_visits_.assign(agents_.size(), Grid<std::uint64_t>(world_.rows(), world_.cols(), 0));

    const auto cells = static_cast<std::uint64_t>(world_.state_count());
    const auto span = static_cast<std::uint64_t>(cfg.convergence_window) * cells;
    const auto agents = static_cast<std::uint64_t>(cfg.num_agents);
    value_window_ = std::max<std::uint64_t>(1, (span + agents - 1) / agents);
    next_snapshot_ = cells;
  }

  RunReport execute() {
    if (cfg_.schedule == ScheduleMode::Concurrent && cfg_.num_agents > 1) {
      run_concurrent();
    } else {
      run_sequential();
    }
    if (auto* batched = dynamic_cast<comms::BatchedQStore*>(view_.get())) batched->surface();

    RunReport report;
    report.steps_to_policy_convergence = policy_step_;
    report.steps_to_value_convergence = value_step_;
    for (const auto& v : agent_visits_) {
      for (std::size_t i = 0; i < v.size(); ++i) visits_.values()[i] += v.values()[i];
    }
    report.visit_counts = visits_;
    report.final_q = table_.snapshot();
    report.final_policy = greedy_policy(report.final_q, world_);
    report.converged_policy = converged_policy_;
    report.rounds = rounds_;
    report.agent_steps = total_steps_;
    report.agents = agents_;
    report.estimated_seconds = static_cast<double>(rounds_) * cfg_.seconds_per_step;
    return report;
  }

 private:
  // One action by agent i. `clock` is the team-wide step index before this step.
  void step_agent(std::size_t i, std::uint64_t clock) {
    AgentState& ag = agents_[i];
    const double t = cfg_.clock == ClockMode::Global ? static_cast<double>(clock)
                                                     : static_cast<double>(agent_steps_[i]);
    const double temperature = decay_value(cfg_.temperature, t);
    const double alpha = decay_value(cfg_.learning_rate, t);

    const GridPos s = ag.pos;
    const QRow q = view_->read_row(ag.id, s);
    const Action a = sample_action(boltzmann_probs(q, temperature), ag.rng);
    const GridPos next = world_.step(s, a);
    const double updated = view_->apply_update(ag.id, s, a, reward(field_, s), next, alpha, cfg_.gamma);

    agent_delta_[i] = std::max(agent_delta_[i], std::abs(updated - q[index_of(a)]));
    agent_visits_[i][s] += 1;
    ++agent_steps_[i];
    ag.pos = next;
    if (cfg_.energy_budget) ag.energy = std::max(0.0, ag.energy - 1.0);
  }

  bool any_active() const {
    return std::any_of(agents_.begin(), agents_.end(), [](const AgentState& a) { return a.active(); });
  }

  // Returns true when the run should stop.
  bool end_round() {
    ++rounds_;
    view_->end_round(rounds_);

    double delta = 0.0;
    for (double& d : agent_delta_) {
      delta = std::max(delta, d);
      d = 0.0;
    }

    std::optional<QSnapshot> snap;
    if (cfg_.value_eps_mode == ValueEpsMode::Relative) {
      snap = table_.snapshot();
      const double scale = snap->max_abs();
      delta = scale > 0.0 ? delta / scale : delta;
    }
    deltas_.push_back(delta);
    if (deltas_.size() > 2 * value_window_ + 64) {
      deltas_.erase(deltas_.begin(), deltas_.end() - static_cast<std::ptrdiff_t>(value_window_));
    }
    if (!value_step_ && value_converged(deltas_, value_window_, cfg_.value_eps)) value_step_ = rounds_;

    if (total_steps_ >= next_snapshot_) {
      const auto cells = static_cast<std::uint64_t>(world_.state_count());
      while (next_snapshot_ <= total_steps_) next_snapshot_ += cells;
      if (!snap) snap = table_.snapshot();
      history_.push_back(greedy_policy(*snap, world_));
      const auto w = static_cast<std::size_t>(cfg_.convergence_window);
      if (history_.size() > w) history_.erase(history_.begin());
      if (!policy_step_ && policy_converged(history_, cfg_.convergence_window)) {
        policy_step_ = rounds_;
        converged_policy_ = history_.back();
      }
    }

    if (policy_step_ && (value_step_ || !cfg_.run_until_value_convergence)) return true;
    if (rounds_ >= cfg_.max_steps) return true;
    return !any_active();
  }

  void run_sequential() {
    if (!any_active()) return;
    bool stop = false;
    while (!stop) {
      for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (!agents_[i].active()) continue;
        step_agent(i, total_steps_++);
      }
      stop = end_round();
    }
  }

  void run_concurrent() {
    if (!any_active()) return;
    std::atomic<std::uint64_t> clock{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;
    std::vector<std::exception_ptr> worker_failures(agents_.size());

    auto on_round = [&]() noexcept {
      total_steps_ = clock.load();
      for (auto& f : worker_failures) {
        if (f && !failure) failure = f;
      }
      if (failure) {
        stop = true;
        return;
      }
      try {
        if (end_round()) stop = true;
      } catch (...) {
        failure = std::current_exception();
        stop = true;
      }
    };
    std::barrier sync(static_cast<std::ptrdiff_t>(agents_.size()), on_round);

    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      workers.emplace_back([&, i] {
        while (!stop.load()) {
          try {
            if (agents_[i].active() && !worker_failures[i]) step_agent(i, clock.fetch_add(1));
          } catch (...) {
            worker_failures[i] = std::current_exception();
          }
          sync.arrive_and_wait();
        }
      });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
  }

  const RewardField& field_;
  const EngineConfig& cfg_;
  GridWorld world_;
  QTable table_;
  std::unique_ptr<QStoreView> view_;
  std::vector<AgentState> agents_;
  std::vector<std::uint64_t> agent_steps_;
  std::vector<double> agent_delta_;
  std::vector<Grid<std::uint64_t>> agent_visits_;
  Grid<std::uint64_t> visits_;

  std::uint64_t rounds_ = 0;
  std::uint64_t total_steps_ = 0;
  std::uint64_t next_snapshot_ = 0;
  std::uint64_t value_window_ = 1;
  std::vector<double> deltas_;
  std::vector<Grid<Action>> history_;
  std::optional<std::uint64_t> policy_step_;
  std::optional<std::uint64_t> value_step_;
  Grid<Action> converged_policy_;
};

}  // namespace

RunReport run(const RewardField& field, const EngineConfig& cfg) {
  cfg.validate();
  if (field.rewards.empty()) throw ConfigError("reward field is empty");
  for (double r : field.rewards) {
    if (!std::isfinite(r)) throw ConfigError("reward field contains a non-finite value");
  }
  Runner runner(field, cfg);
  return runner.execute();
}

}  // namespace uwmarl
