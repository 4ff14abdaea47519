#include "preact/milestones.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>

#include <yaml-cpp/yaml.h>

namespace preact {

std::string GraphError::to_string() const {
    if (kind == Kind::Cycle && !cycle.empty()) {
        std::string path;
        for (const std::string& n : cycle) {
            if (!path.empty()) path += " -> ";
            path += n;
        }
        return message + " (" + path + ")";
    }
    return message;
}

Result<MilestoneGraph, GraphError> MilestoneGraph::build(std::vector<Milestone> milestones) {
    if (milestones.empty()) {
        return GraphError{GraphError::Kind::Schema, "milestone list is empty", {}};
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < milestones.size(); ++i) {
        const Milestone& m = milestones[i];
        if (m.name.empty()) return GraphError{GraphError::Kind::Schema, "milestone with empty name", {}};
        if (!index.emplace(m.name, i).second) {
            return GraphError{GraphError::Kind::Schema, "duplicate milestone '" + m.name + "'", {}};
        }
    }
    for (const Milestone& m : milestones) {
        for (const std::string& dep : m.dependencies) {
            if (!index.count(dep)) {
                return GraphError{GraphError::Kind::Dangling,
                                  "milestone '" + m.name + "' depends on unknown '" + dep + "'",
                                  {}};
            }
        }
    }

    // Cycle check via DFS, keeping the offending path for the error.
    enum class Color { White, Gray, Black };
    std::map<std::string, Color> color;
    std::vector<std::string> stack;
    std::vector<std::string> cycle;

    std::function<bool(const std::string&)> visit = [&](const std::string& name) {
        color[name] = Color::Gray;
        stack.push_back(name);
        for (const std::string& dep : milestones[index[name]].dependencies) {
            if (color[dep] == Color::Gray) {
                auto begin = std::find(stack.begin(), stack.end(), dep);
                cycle.assign(begin, stack.end());
                cycle.push_back(dep);
                return false;
            }
            if (color[dep] == Color::White && !visit(dep)) return false;
        }
        stack.pop_back();
        color[name] = Color::Black;
        return true;
    };
    for (const Milestone& m : milestones) {
        if (color[m.name] == Color::White && !visit(m.name)) {
            return GraphError{GraphError::Kind::Cycle, "dependency cycle detected", cycle};
        }
    }

    // Exactly one end node: a node no other milestone depends on.
    std::set<std::string> depended_on;
    for (const Milestone& m : milestones) {
        for (const std::string& dep : m.dependencies) depended_on.insert(dep);
    }
    std::vector<std::string> ends;
    for (const Milestone& m : milestones) {
        if (!depended_on.count(m.name)) ends.push_back(m.name);
    }
    if (ends.empty()) return GraphError{GraphError::Kind::NoEnd, "no end milestone", {}};
    if (ends.size() > 1) {
        std::string list;
        for (const std::string& e : ends) list += (list.empty() ? "" : ", ") + e;
        return GraphError{GraphError::Kind::MultipleEnds, "multiple end milestones: " + list, {}};
    }

    MilestoneGraph graph;
    graph.milestones_ = std::move(milestones);
    graph.end_ = ends.front();

    // Kahn topological order (dependencies first), deterministic by keeping
    // declaration order in the ready queue.
    std::map<std::string, int> remaining;
    for (const Milestone& m : graph.milestones_) {
        remaining[m.name] = static_cast<int>(m.dependencies.size());
    }
    std::vector<std::string> order;
    while (order.size() < graph.milestones_.size()) {
        for (const Milestone& m : graph.milestones_) {
            if (remaining[m.name] == 0) {
                order.push_back(m.name);
                remaining[m.name] = -1;
                for (const Milestone& other : graph.milestones_) {
                    for (const std::string& dep : other.dependencies) {
                        if (dep == m.name) --remaining[other.name];
                    }
                }
            }
        }
    }
    graph.topo_ = std::move(order);
    return graph;
}

const Milestone* MilestoneGraph::find(const std::string& name) const {
    for (const Milestone& m : milestones_) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

std::vector<std::string> MilestoneGraph::start_nodes() const {
    std::vector<std::string> out;
    for (const Milestone& m : milestones_) {
        if (m.dependencies.empty()) out.push_back(m.name);
    }
    return out;
}

int MilestoneGraph::distance_to_end(const std::string& name) const {
    // BFS from the end over reversed dependency edges (end -> its deps ...).
    std::map<std::string, int> dist;
    std::deque<std::string> queue;
    dist[end_] = 0;
    queue.push_back(end_);
    while (!queue.empty()) {
        std::string node = queue.front();
        queue.pop_front();
        for (const std::string& dep : find(node)->dependencies) {
            if (!dist.count(dep)) {
                dist[dep] = dist[node] + 1;
                queue.push_back(dep);
            }
        }
    }
    auto it = dist.find(name);
    return it == dist.end() ? -1 : it->second;
}

Result<MilestoneGraph, GraphError> parse_milestone_graph(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        return GraphError{GraphError::Kind::Yaml, std::string("invalid YAML: ") + e.what(), {}};
    }
    if (root.IsMap() && root["milestones"]) root = root["milestones"];
    if (!root.IsSequence()) {
        return GraphError{GraphError::Kind::Schema, "expected a YAML list of milestones", {}};
    }
    std::vector<Milestone> milestones;
    for (const YAML::Node& node : root) {
        if (!node.IsMap() || !node["name"]) {
            return GraphError{GraphError::Kind::Schema, "milestone entry needs a 'name'", {}};
        }
        Milestone m;
        m.name = node["name"].as<std::string>();
        std::string type = node["type"] ? node["type"].as<std::string>() : "NFC";
        if (type == "FC") {
            m.kind = MilestoneKind::FC;
        } else if (type == "NFC") {
            m.kind = MilestoneKind::NFC;
        } else {
            return GraphError{GraphError::Kind::Schema,
                              "milestone '" + m.name + "': type must be FC or NFC", {}};
        }
        if (node["description"]) m.description = node["description"].as<std::string>();
        if (node["dependencies"]) {
            if (!node["dependencies"].IsSequence()) {
                return GraphError{GraphError::Kind::Schema,
                                  "milestone '" + m.name + "': dependencies must be a list", {}};
            }
            for (const YAML::Node& dep : node["dependencies"]) {
                m.dependencies.push_back(dep.as<std::string>());
            }
        }
        if (node["or_group"]) m.or_group = node["or_group"].as<bool>();
        milestones.push_back(std::move(m));
    }
    return MilestoneGraph::build(std::move(milestones));
}

std::string render_milestone_graph_yaml(const MilestoneGraph& graph) {
    YAML::Emitter out;
    out << YAML::BeginSeq;
    for (const Milestone& m : graph.milestones()) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << m.name;
        out << YAML::Key << "type" << YAML::Value << (m.kind == MilestoneKind::FC ? "FC" : "NFC");
        out << YAML::Key << "description" << YAML::Value << m.description;
        out << YAML::Key << "dependencies" << YAML::Value << YAML::Flow << m.dependencies;
        if (m.or_group) out << YAML::Key << "or_group" << YAML::Value << true;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    return std::string(out.c_str()) + "\n";
}

std::optional<int> AchievedSet::step_of(const std::string& name) const {
    for (const Entry& e : entries) {
        if (e.milestone == name) return e.step;
    }
    return std::nullopt;
}

std::vector<std::string> validly_achieved(const MilestoneGraph& graph, const AchievedSet& achieved,
                                          std::vector<std::string>* warnings) {
    std::map<std::string, int> steps;
    for (const AchievedSet::Entry& e : achieved.entries) {
        if (!graph.find(e.milestone)) {
            if (warnings) warnings->push_back("unknown milestone '" + e.milestone + "' ignored");
            continue;
        }
        if (steps.count(e.milestone)) {
            if (warnings) warnings->push_back("duplicate milestone '" + e.milestone + "' ignored");
            continue;
        }
        steps[e.milestone] = e.step;
    }

    std::set<std::string> valid;
    for (const std::string& name : graph.topological_order()) {
        auto it = steps.find(name);
        if (it == steps.end()) continue;
        const Milestone* m = graph.find(name);
        bool ok;
        if (m->dependencies.empty()) {
            ok = true;
        } else if (m->or_group) {
            ok = false;
            for (const std::string& dep : m->dependencies) {
                if (valid.count(dep) && steps[dep] <= it->second) {
                    ok = true;
                    break;
                }
            }
        } else {
            ok = true;
            for (const std::string& dep : m->dependencies) {
                if (!valid.count(dep) || steps[dep] > it->second) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) valid.insert(name);
    }

    // Deterministic output order: topological.
    std::vector<std::string> out;
    for (const std::string& name : graph.topological_order()) {
        if (valid.count(name)) out.push_back(name);
    }
    return out;
}

double progress_rate(const MilestoneGraph& graph, const AchievedSet& achieved) {
    std::vector<std::string> valid_list = validly_achieved(graph, achieved);
    std::set<std::string> valid(valid_list.begin(), valid_list.end());
    if (valid.empty()) return 0.0;

    // Longest start-rooted path length through validly achieved nodes only.
    std::map<std::string, int> longest;  // only for reachable valid nodes
    for (const std::string& name : graph.topological_order()) {
        if (!valid.count(name)) continue;
        const Milestone* m = graph.find(name);
        int best = m->dependencies.empty() ? 0 : -1;
        for (const std::string& dep : m->dependencies) {
            auto it = longest.find(dep);
            if (it != longest.end()) best = std::max(best, it->second + 1);
        }
        if (best >= 0) longest[name] = best;
    }
    if (longest.empty()) return 0.0;

    double best_rate = 0.0;
    for (const auto& [name, covered] : longest) {
        int remaining = graph.distance_to_end(name);
        if (remaining < 0) continue;
        double rate = (covered + remaining) == 0
                          ? 1.0
                          : static_cast<double>(covered) / (covered + remaining);
        best_rate = std::max(best_rate, rate);
    }
    return best_rate;
}

bool goal_completion(const MilestoneGraph& graph, const AchievedSet& achieved) {
    std::vector<std::string> valid = validly_achieved(graph, achieved);
    return std::find(valid.begin(), valid.end(), graph.end_node()) != valid.end();
}

}  // namespace preact
