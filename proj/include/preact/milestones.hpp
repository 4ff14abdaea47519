#pragma once

#include <optional>
#include <string>
#include <vector>

#include "preact/plan.hpp"
#include "preact/result.hpp"

namespace preact {

enum class MilestoneKind { FC, NFC };

// A graph node: FC milestones correspond to a tool invocation, NFC milestones
// to states or conversational checkpoints. Dependencies are conjunctive
// unless or_group marks them as disjunctive.
struct Milestone {
    std::string name;
    MilestoneKind kind = MilestoneKind::NFC;
    std::string description;
    std::vector<std::string> dependencies;
    bool or_group = false;
};

struct GraphError {
    enum class Kind { Io, Yaml, Schema, Dangling, Cycle, NoEnd, MultipleEnds };
    Kind kind = Kind::Schema;
    std::string message;
    std::vector<std::string> cycle;  // populated for Kind::Cycle

    std::string to_string() const;
};

// Validated milestone DAG: acyclic, all dependencies resolve, exactly one end
// node (a node nothing depends on). Those properties together put every node
// on some start-to-end path.
class MilestoneGraph {
public:
    static Result<MilestoneGraph, GraphError> build(std::vector<Milestone> milestones);

    const std::vector<Milestone>& milestones() const { return milestones_; }
    const Milestone* find(const std::string& name) const;
    std::vector<std::string> start_nodes() const;  // nodes without dependencies
    const std::string& end_node() const { return end_; }

    // Shortest edge distance to the end node (every node reaches it).
    int distance_to_end(const std::string& name) const;

    // Names in a fixed topological order (dependencies first).
    const std::vector<std::string>& topological_order() const { return topo_; }

private:
    std::vector<Milestone> milestones_;
    std::vector<std::string> topo_;
    std::string end_;
};

// YAML list of {name, type: FC|NFC, description, dependencies: [names],
// or_group: bool}.
Result<MilestoneGraph, GraphError> parse_milestone_graph(const std::string& yaml_text);

std::string render_milestone_graph_yaml(const MilestoneGraph& graph);

// Judge-reported milestone completions with the conversation step where each
// was first achieved.
struct AchievedSet {
    struct Entry {
        std::string milestone;
        int step = 0;
    };
    std::vector<Entry> entries;

    std::optional<int> step_of(const std::string& name) const;
};

// A milestone is validly achieved when it was reported achieved, and its
// dependencies (all of them, or at least one for an or_group) were validly
// achieved no later than it. Unknown milestone names are dropped with a
// warning.
std::vector<std::string> validly_achieved(const MilestoneGraph& graph, const AchievedSet& achieved,
                                          std::vector<std::string>* warnings = nullptr);

// Fraction of the start-to-end distance covered by validly achieved
// milestones: over every achievable frontier node v (reachable from a start
// through validly achieved nodes only), the best covered/(covered+remaining)
// where covered is the longest such path to v and remaining the shortest edge
// distance from v to the end. 1.0 exactly when the end is validly achieved.
double progress_rate(const MilestoneGraph& graph, const AchievedSet& achieved);

// True iff the end milestone is validly achieved (equivalently: progress_rate
// is exactly 1).
bool goal_completion(const MilestoneGraph& graph, const AchievedSet& achieved);

}  // namespace preact
