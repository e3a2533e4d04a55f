#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "treatsim/belief.hpp"
#include "treatsim/domain.hpp"
#include "treatsim/transition_model.hpp"

namespace treatsim {

/// How chance nodes combine their children.
enum class BackupMode : std::uint8_t {
  Normal,   // probability-weighted mean
  MaxProb,  // value of the most probable child
};

std::string_view to_string(BackupMode mode);

enum class NodeKind : std::uint8_t { Decision, Chance, Terminal, Leaf };

std::string_view to_string(NodeKind kind);

struct SearchNode {
  NodeKind kind = NodeKind::Leaf;
  Belief belief;
  double accumulated_cost = 0.0;
  int session_index = 0;
  double probability = 1.0;        // reaching probability from a chance parent
  Action action = Action::Treat;   // action leading into Chance/Terminal nodes
  DeltaBin outcome = DeltaBin::Flatline;  // one-step outcome for chance children
  double value = 0.0;
  std::vector<std::size_t> children;
};

/// Nodes stored in creation order; index 0 is the root and every child has a
/// larger index than its parent.
struct SearchTree {
  std::vector<SearchNode> nodes;

  const SearchNode& root() const { return nodes.front(); }
  std::size_t size() const { return nodes.size(); }
};

struct PlannerSettings {
  BackupMode mode = BackupMode::Normal;
  double osf = 0.0;
  double osf_scale = 1.0;          // multiplier applied to osf at valuation
  double delta_max_floor = 1.0;
  std::size_t node_budget = 5'000'000;
  bool retain_subtree = false;     // fill Plan::optimal_subtree
};

struct Plan {
  Action root_action = Action::Stop;
  double root_value = 0.0;
  double treat_value = 0.0;
  double stop_value = 0.0;
  SearchTree optimal_subtree;  // empty unless requested
  std::size_t node_count = 0;  // nodes of the full expansion
};

/// Exact node count of the expansion with `remaining` decision layers.
std::size_t tree_size(int remaining, int branching = static_cast<int>(kNumBins));

/// Solves the finite-horizon tree rooted at `b`. Ties between Treat and Stop
/// resolve to Stop. Throws Error(HorizonReached) when no session is left and
/// Error(Capacity) when the expansion would exceed the node budget.
Plan plan(const Belief& b, int session_index, double accumulated_cost,
          const TransitionModel& model, const ScaleConfig& cfg,
          const PlannerSettings& settings = {});

/// Materialises and solves the complete tree (all actions, all outcomes).
SearchTree expand_tree(const Belief& b, int session_index, double accumulated_cost,
                       const TransitionModel& model, const ScaleConfig& cfg,
                       const PlannerSettings& settings = {});

/// Value of a terminal or leaf node: CPUC of the expected final delta plus
/// the outcome-scaling term.
double leaf_value(const Belief& b, double accumulated_cost, const ScaleConfig& cfg,
                  const PlannerSettings& settings);

/// Keeps all chance children and the chosen child of each decision node.
SearchTree extract_optimal_subtree(const SearchTree& full);

/// Indented text dump, one node per line.
void dump_tree(std::ostream& out, const SearchTree& tree);

}  // namespace treatsim
