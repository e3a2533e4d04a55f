#include "treatsim/planner.hpp"

#include <bit>
#include <limits>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "treatsim/error.hpp"
#include "treatsim/utility.hpp"

namespace treatsim {

namespace {

struct ChanceOutcome {
  double probability = 0.0;
  DeltaBin step = DeltaBin::Flatline;
  Belief belief;
};

// Children of a Treat chance node: one per one-step outcome bin, each carrying
// a point-mass belief on the conditioning bin that outcome leads to.
std::array<ChanceOutcome, kNumBins> treat_outcomes(const Belief& b, const TransitionModel& model,
                                                   const ScaleConfig& cfg) {
  const BinVector q = next_step_distribution(b, Action::Treat, model);
  std::array<ChanceOutcome, kNumBins> out;
  for (std::size_t n = 0; n < kNumBins; ++n) {
    const DeltaBin step = bin_at(n);
    Belief child = b;
    child.probs = point_mass(conditioning_after(b, step, model, cfg));
    child.previous_score = b.expected_score;
    child.expected_score = cfg.clamp(b.expected_score.value + model.effect_mean(step));
    out[n] = ChanceOutcome{q[n], step, child};
  }
  return out;
}

// Index of the child a MaxProb backup follows; ties go to the better bin.
template <typename ProbAt>
std::size_t most_probable(std::size_t count, ProbAt prob_at) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < count; ++i) {
    if (prob_at(i) >= prob_at(best)) best = i;
  }
  return best;
}

DeltaBin point_mass_bin(const Belief& b) {
  for (std::size_t i = 0; i < kNumBins; ++i) {
    if (b.probs[i] == 1.0) return bin_at(i);
  }
  return DeltaBin::Flatline;
}

class Solver {
 public:
  Solver(const TransitionModel& model, const ScaleConfig& cfg, const PlannerSettings& settings)
      : model_(model), cfg_(cfg), settings_(settings) {}

  // Value of a decision node with `remaining` decision layers below it.
  double decision_value(const Belief& b, double cost, int remaining) {
    if (remaining == 0) return leaf_value(b, cost, cfg_, settings_);
    const Key key{remaining, index_of(point_mass_bin(b)),
                  std::bit_cast<std::uint64_t>(b.expected_score.value)};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const double stop = leaf_value(b, cost, cfg_, settings_);
    const double treat = treat_value(b, cost, remaining);
    const double value = treat < stop ? treat : stop;
    memo_.emplace(key, value);
    return value;
  }

  // Value of treating from `b`; works for mixture beliefs as well.
  double treat_value(const Belief& b, double cost, int remaining) {
    const auto outcomes = treat_outcomes(b, model_, cfg_);
    const double child_cost = cost + cfg_.cps;
    if (settings_.mode == BackupMode::MaxProb) {
      const std::size_t best =
          most_probable(kNumBins, [&](std::size_t i) { return outcomes[i].probability; });
      return decision_value(outcomes[best].belief, child_cost, remaining - 1);
    }
    double sum = 0.0;
    for (const auto& o : outcomes) {
      if (o.probability == 0.0) continue;
      sum += o.probability * decision_value(o.belief, child_cost, remaining - 1);
    }
    return sum;
  }

  // Optimal subtree below a decision node, appended to `tree`.
  std::size_t build(SearchTree& tree, const Belief& b, double cost, int session, int remaining,
                    double probability, DeltaBin outcome) {
    const std::size_t id = tree.nodes.size();
    SearchNode node;
    node.belief = b;
    node.accumulated_cost = cost;
    node.session_index = session;
    node.probability = probability;
    node.outcome = outcome;
    if (remaining == 0) {
      node.kind = NodeKind::Leaf;
      node.value = leaf_value(b, cost, cfg_, settings_);
      tree.nodes.push_back(std::move(node));
      return id;
    }
    node.kind = NodeKind::Decision;
    const double stop = leaf_value(b, cost, cfg_, settings_);
    const double treat = treat_value(b, cost, remaining);
    node.value = treat < stop ? treat : stop;
    tree.nodes.push_back(std::move(node));

    SearchNode child;
    child.belief = b;
    child.accumulated_cost = cost;
    child.session_index = session;
    const std::size_t child_id = tree.nodes.size();
    tree.nodes[id].children.push_back(child_id);
    if (!(treat < stop)) {
      child.kind = NodeKind::Terminal;
      child.action = Action::Stop;
      child.value = stop;
      tree.nodes.push_back(std::move(child));
      return id;
    }
    child.kind = NodeKind::Chance;
    child.action = Action::Treat;
    child.value = treat;
    tree.nodes.push_back(std::move(child));
    for (const auto& o : treat_outcomes(b, model_, cfg_)) {
      const std::size_t grand = build(tree, o.belief, cost + cfg_.cps, session + 1, remaining - 1,
                                      o.probability, o.step);
      tree.nodes[child_id].children.push_back(grand);
    }
    return id;
  }

 private:
  struct Key {
    int remaining;
    std::size_t bin;
    std::uint64_t score_bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = k.score_bits * 0x9E3779B97F4A7C15ULL;
      h ^= (static_cast<std::size_t>(k.remaining) << 8) ^ k.bin;
      return h * 0xBF58476D1CE4E5B9ULL;
    }
  };

  const TransitionModel& model_;
  const ScaleConfig& cfg_;
  const PlannerSettings& settings_;
  std::unordered_map<Key, double, KeyHash> memo_;
};

int remaining_sessions(int session_index, const ScaleConfig& cfg) {
  if (session_index >= cfg.horizon) {
    throw Error(ErrorKind::HorizonReached,
                fmt::format("session {} is at or beyond the horizon {}", session_index, cfg.horizon));
  }
  if (session_index < 0) throw Error(ErrorKind::InvalidInput, "session index must be >= 0");
  return cfg.horizon - session_index;
}

void check_budget(int remaining, const PlannerSettings& settings) {
  const std::size_t size = tree_size(remaining);
  if (size > settings.node_budget) {
    throw Error(ErrorKind::Capacity,
                fmt::format("search tree of {} nodes exceeds the budget of {}", size,
                            settings.node_budget));
  }
}

}  // namespace

std::string_view to_string(BackupMode mode) {
  return mode == BackupMode::Normal ? "Normal" : "MaxProb";
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Decision: return "Decision";
    case NodeKind::Chance: return "Chance";
    case NodeKind::Terminal: return "Terminal";
    case NodeKind::Leaf: return "Leaf";
  }
  return "unknown";
}

std::size_t tree_size(int remaining, int branching) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t size = 1;
  const auto b = static_cast<std::size_t>(branching);
  for (int r = 0; r < remaining; ++r) {
    if (b != 0 && size > (kMax - 3) / b) return kMax;
    size = 3 + b * size;
  }
  return size;
}

double leaf_value(const Belief& b, double accumulated_cost, const ScaleConfig& cfg,
                  const PlannerSettings& settings) {
  const double delta = delta_from_scores(b.expected_score, b.baseline_score);
  const double base = cpuc(accumulated_cost, delta, cfg.cps);
  const double osf = settings.osf * settings.osf_scale;
  if (osf == 0.0) return base;
  return osf_adjust(base, delta, delta_max_for(b, cfg, settings.delta_max_floor), osf);
}

Plan plan(const Belief& b, int session_index, double accumulated_cost,
          const TransitionModel& model, const ScaleConfig& cfg, const PlannerSettings& settings) {
  const int remaining = remaining_sessions(session_index, cfg);
  check_budget(remaining, settings);

  Solver solver(model, cfg, settings);
  Plan p;
  p.stop_value = leaf_value(b, accumulated_cost, cfg, settings);
  p.treat_value = solver.treat_value(b, accumulated_cost, remaining);
  p.root_action = p.treat_value < p.stop_value ? Action::Treat : Action::Stop;
  p.root_value = p.root_action == Action::Treat ? p.treat_value : p.stop_value;
  p.node_count = tree_size(remaining);
  if (settings.retain_subtree) {
    solver.build(p.optimal_subtree, b, accumulated_cost, session_index, remaining, 1.0,
                 DeltaBin::Flatline);
  }
  return p;
}

SearchTree expand_tree(const Belief& b, int session_index, double accumulated_cost,
                       const TransitionModel& model, const ScaleConfig& cfg,
                       const PlannerSettings& settings) {
  const int remaining = remaining_sessions(session_index, cfg);
  check_budget(remaining, settings);

  SearchTree tree;
  tree.nodes.reserve(tree_size(remaining));

  // Depth-first expansion; children always receive larger indices.
  auto expand = [&](auto& self, const Belief& belief, double cost, int session, double probability,
                    DeltaBin outcome) -> std::size_t {
    const std::size_t id = tree.nodes.size();
    SearchNode node;
    node.belief = belief;
    node.accumulated_cost = cost;
    node.session_index = session;
    node.probability = probability;
    node.outcome = outcome;
    node.kind = session >= cfg.horizon ? NodeKind::Leaf : NodeKind::Decision;
    tree.nodes.push_back(std::move(node));
    if (session >= cfg.horizon) return id;

    SearchNode chance;
    chance.kind = NodeKind::Chance;
    chance.action = Action::Treat;
    chance.belief = belief;
    chance.accumulated_cost = cost;
    chance.session_index = session;
    const std::size_t chance_id = tree.nodes.size();
    tree.nodes.push_back(std::move(chance));
    tree.nodes[id].children.push_back(chance_id);
    for (const auto& o : treat_outcomes(belief, model, cfg)) {
      const std::size_t child = self(self, o.belief, cost + cfg.cps, session + 1, o.probability, o.step);
      tree.nodes[chance_id].children.push_back(child);
    }

    SearchNode terminal;
    terminal.kind = NodeKind::Terminal;
    terminal.action = Action::Stop;
    terminal.belief = belief;
    terminal.accumulated_cost = cost;
    terminal.session_index = session;
    const std::size_t terminal_id = tree.nodes.size();
    tree.nodes.push_back(std::move(terminal));
    tree.nodes[id].children.push_back(terminal_id);
    return id;
  };
  expand(expand, b, accumulated_cost, session_index, 1.0, DeltaBin::Flatline);

  // Backward pass in reverse creation order.
  for (std::size_t i = tree.nodes.size(); i-- > 0;) {
    SearchNode& node = tree.nodes[i];
    switch (node.kind) {
      case NodeKind::Leaf:
      case NodeKind::Terminal:
        node.value = leaf_value(node.belief, node.accumulated_cost, cfg, settings);
        break;
      case NodeKind::Chance: {
        const auto& kids = node.children;
        if (settings.mode == BackupMode::MaxProb) {
          const std::size_t best = most_probable(
              kids.size(), [&](std::size_t k) { return tree.nodes[kids[k]].probability; });
          node.value = tree.nodes[kids[best]].value;
        } else {
          double sum = 0.0;
          for (std::size_t k : kids) {
            const SearchNode& c = tree.nodes[k];
            if (c.probability == 0.0) continue;
            sum += c.probability * c.value;
          }
          node.value = sum;
        }
        break;
      }
      case NodeKind::Decision: {
        const double treat = tree.nodes[node.children[0]].value;
        const double stop = tree.nodes[node.children[1]].value;
        node.value = treat < stop ? treat : stop;
        break;
      }
    }
  }
  return tree;
}

SearchTree extract_optimal_subtree(const SearchTree& full) {
  SearchTree out;
  if (full.nodes.empty()) return out;
  auto copy = [&](auto& self, std::size_t src) -> std::size_t {
    const SearchNode& node = full.nodes[src];
    const std::size_t id = out.nodes.size();
    SearchNode clone = node;
    clone.children.clear();
    out.nodes.push_back(std::move(clone));
    std::vector<std::size_t> keep;
    if (node.kind == NodeKind::Decision) {
      const double treat = full.nodes[node.children[0]].value;
      const double stop = full.nodes[node.children[1]].value;
      keep.push_back(treat < stop ? node.children[0] : node.children[1]);
    } else {
      keep = node.children;
    }
    for (std::size_t k : keep) {
      const std::size_t child = self(self, k);
      out.nodes[id].children.push_back(child);
    }
    return id;
  };
  copy(copy, 0);
  return out;
}

void dump_tree(std::ostream& out, const SearchTree& tree) {
  if (tree.nodes.empty()) return;
  auto visit = [&](auto& self, std::size_t id, int depth) -> void {
    const SearchNode& n = tree.nodes[id];
    fmt::print(out, "{:{}}{} session={} ", "", depth * 2, to_string(n.kind), n.session_index);
    if (n.kind == NodeKind::Chance || n.kind == NodeKind::Terminal) {
      fmt::print(out, "action={} ", to_string(n.action));
    }
    if (n.kind == NodeKind::Decision || n.kind == NodeKind::Leaf) {
      fmt::print(out, "outcome={} p={:.6g} ", to_string(n.outcome), n.probability);
    }
    fmt::print(out, "cost={:.6g} score={:.6g} probs=[{:.4g},{:.4g},{:.4g},{:.4g},{:.4g}] value={:.6g}\n",
               n.accumulated_cost, n.belief.expected_score.value, n.belief.probs[0],
               n.belief.probs[1], n.belief.probs[2], n.belief.probs[3], n.belief.probs[4], n.value);
    for (std::size_t c : n.children) self(self, c, depth + 1);
  };
  visit(visit, 0, 0);
}

}  // namespace treatsim
