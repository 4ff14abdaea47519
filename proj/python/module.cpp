#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "preact/dataset.hpp"
#include "preact/eval_turn.hpp"
#include "preact/grammar.hpp"
#include "preact/milestones.hpp"
#include "preact/orchestrator.hpp"
#include "preact/prompt.hpp"
#include "preact/simulation.hpp"

namespace py = pybind11;
using namespace preact;

namespace {

// json <-> python object bridges so the module speaks dicts and lists.
py::object json_to_py(const json& v) {
    switch (v.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(v.get<bool>());
        case json::value_t::number_integer: return py::int_(v.get<long long>());
        case json::value_t::number_unsigned: return py::int_(v.get<unsigned long long>());
        case json::value_t::number_float: return py::float_(v.get<double>());
        case json::value_t::string: return py::str(v.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const json& item : v) out.append(json_to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (auto it = v.begin(); it != v.end(); ++it) {
                out[py::str(it.key())] = json_to_py(it.value());
            }
            return out;
        }
        default: return py::none();
    }
}

json py_to_json(py::handle h) {
    if (h.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(h)) return h.cast<bool>();
    if (py::isinstance<py::int_>(h)) return h.cast<long long>();
    if (py::isinstance<py::float_>(h)) return h.cast<double>();
    if (py::isinstance<py::str>(h)) return h.cast<std::string>();
    if (py::isinstance<py::dict>(h)) {
        json out = json::object();
        for (auto item : h.cast<py::dict>()) {
            out[item.first.cast<std::string>()] = py_to_json(item.second);
        }
        return out;
    }
    if (py::isinstance<py::list>(h) || py::isinstance<py::tuple>(h)) {
        json out = json::array();
        for (auto item : h.cast<py::sequence>()) out.push_back(py_to_json(item));
        return out;
    }
    throw py::type_error("unsupported value type for JSON conversion");
}

Mode mode_arg(const std::string& name) {
    auto mode = mode_from_name(name);
    if (!mode) throw py::value_error("mode must be 'react' or 'preact'");
    return *mode;
}

json action_json(const Action& a) { return action_to_json(std::optional<Action>(a)); }

json plan_to_json_obj(const Plan& plan) {
    json steps = json::array();
    for (const PlanStep& s : plan.steps) {
        steps.push_back(json{{"action", action_json(s.action)},
                             {"index", s.index},
                             {"thought", s.thought}});
    }
    return json{{"steps", steps}};
}

Plan plan_from_py(py::handle obj) {
    json doc = py_to_json(obj);
    Plan plan;
    for (const json& s : doc.at("steps")) {
        PlanStep step;
        step.index = s.at("index").get<int>();
        step.thought = s.value("thought", std::string{});
        const json& a = s.at("action");
        std::string kind = a.at("kind").get<std::string>();
        if (kind == "tool") {
            step.action = Action::tool(a.at("name").get<std::string>(),
                                       a.value("arguments", json::object()));
        } else if (kind == "final") {
            step.action = Action::final(a.at("text").get<std::string>());
        } else {
            throw py::value_error("step action kind must be 'tool' or 'final'");
        }
        plan.steps.push_back(std::move(step));
    }
    return plan;
}

Conversation conversation_from_py(py::handle obj) {
    auto conv = conversation_from_json(py_to_json(obj));
    if (!conv) throw py::value_error(conv.error().to_string());
    return conv.value();
}

std::vector<ToolDefinition> tools_from_py(py::handle obj) {
    json record{{"instruction", ""},
                {"tools", py_to_json(obj)},
                {"turns", json::array({json{{"user", "x"}, {"assistant", "x"}}})}};
    auto conv = conversation_from_json(record);
    if (!conv) throw py::value_error(conv.error().to_string());
    return conv.value().tools;
}

py::list pairs_to_py(const std::vector<TrainingPair>& pairs) {
    py::list out;
    for (const TrainingPair& p : pairs) out.append(json_to_py(p.to_json()));
    return out;
}

MilestoneGraph graph_arg(const std::string& yaml_text) {
    auto graph = parse_milestone_graph(yaml_text);
    if (!graph) throw py::value_error(graph.error().to_string());
    return std::move(graph.value());
}

AchievedSet achieved_arg(py::handle entries) {
    AchievedSet achieved;
    for (auto item : entries.cast<py::sequence>()) {
        auto pair = item.cast<py::sequence>();
        achieved.entries.push_back(
            {pair[0].cast<std::string>(), pair[1].cast<int>()});
    }
    return achieved;
}

// LlmPort backed by a python callable: messages -> completion text.
class CallableLlm : public LlmPort {
public:
    explicit CallableLlm(py::function fn) : fn_(std::move(fn)) {}

    Result<std::string, TransportError> complete(const LlmRequest& request) override {
        py::list messages;
        for (const ChatMessage& m : request.messages) {
            messages.append(py::make_tuple(m.role, m.text));
        }
        try {
            return fn_(messages).cast<std::string>();
        } catch (const py::error_already_set& e) {
            return TransportError{e.what()};
        }
    }

private:
    py::function fn_;
};

}  // namespace

PYBIND11_MODULE(preact_agents, m) {
    m.doc() = "Incremental multi-step planning agent runtime and evaluation metrics";

    m.def(
        "render_prompt",
        [](const std::string& instruction, py::object tools, py::object history,
           py::object context, const std::string& mode) {
            PromptBundle bundle;
            bundle.instruction = instruction;
            bundle.tools = tools_from_py(tools);
            for (auto item : history.cast<py::sequence>()) {
                auto pair = item.cast<py::sequence>();
                bundle.history.push_back(
                    {pair[0].cast<std::string>(), pair[1].cast<std::string>()});
            }
            for (auto item : context.cast<py::sequence>()) {
                auto triple = item.cast<py::sequence>();
                json args = py_to_json(triple[1]);
                std::string tool = triple[0].cast<std::string>();
                bundle.context.append(ToolCall{tool, args},
                                      Observation{tool, triple[2].cast<std::string>()});
            }
            bundle.mode = mode_arg(mode);
            return render_prompt(bundle);
        },
        py::arg("instruction"), py::arg("tools") = py::list(), py::arg("history") = py::list(),
        py::arg("context") = py::list(), py::arg("mode") = "react",
        "Render the agent prompt; context entries are (tool, arguments, observation) triples.");

    m.def(
        "parse_plan",
        [](const std::string& text, const std::string& mode) {
            auto plan = parse_plan(text, mode_arg(mode));
            if (!plan) throw py::value_error(plan.error().message());
            return json_to_py(plan_to_json_obj(plan.value()));
        },
        py::arg("text"), py::arg("mode") = "react",
        "Parse a completion into {'steps': [...]}; raises ValueError with position info.");

    m.def(
        "render_plan",
        [](py::object plan, const std::string& mode) {
            return render_plan(plan_from_py(plan), mode_arg(mode));
        },
        py::arg("plan"), py::arg("mode") = "react");

    m.def(
        "transform_react",
        [](py::object conversation) {
            auto pairs = transform_react(conversation_from_py(conversation));
            if (!pairs) throw py::value_error(pairs.error().to_string());
            return pairs_to_py(pairs.value());
        },
        py::arg("conversation"));

    m.def(
        "transform_preact",
        [](py::object conversation) {
            auto pairs = transform_preact(conversation_from_py(conversation));
            if (!pairs) throw py::value_error(pairs.error().to_string());
            return pairs_to_py(pairs.value());
        },
        py::arg("conversation"));

    m.def("token_f1", &token_f1, py::arg("a"), py::arg("b"));

    m.def(
        "similarity",
        [](const std::string& a, const std::string& b) {
            TfCosineSimilarity sim;
            return sim.score(a, b);
        },
        py::arg("a"), py::arg("b"), "Built-in term-frequency cosine similarity.");

    m.def(
        "judge_turn",
        [](py::object gt, py::object pred) {
            auto gt_action = action_from_json(py_to_json(gt));
            if (!gt_action || !gt_action.value().has_value()) {
                throw py::value_error("ground truth must be a tool or final action");
            }
            std::optional<Action> pred_action;
            if (!pred.is_none()) {
                auto parsed = action_from_json(py_to_json(pred));
                if (parsed) pred_action = parsed.value();
            }
            TfCosineSimilarity sim;
            return json_to_py(judge_turn(**gt_action, pred_action, sim).to_json());
        },
        py::arg("gt"), py::arg("pred"),
        "Judge one turn; actions are {'kind': 'tool'|'final'|'error', ...} dicts.");

    m.def(
        "evaluate",
        [](py::object preds, py::object gts) {
            TfCosineSimilarity sim;
            std::vector<TurnJudgment> judgments;
            auto pred_list = preds.cast<py::sequence>();
            auto gt_list = gts.cast<py::sequence>();
            if (py::len(pred_list) != py::len(gt_list)) {
                throw py::value_error("prediction and ground-truth lists differ in length");
            }
            for (std::size_t i = 0; i < py::len(gt_list); ++i) {
                auto gt_action = action_from_json(py_to_json(gt_list[i]));
                if (!gt_action || !gt_action.value().has_value()) {
                    throw py::value_error("ground truth must be a tool or final action");
                }
                std::optional<Action> pred_action;
                auto parsed = action_from_json(py_to_json(pred_list[i]));
                if (parsed) pred_action = parsed.value();
                judgments.push_back(judge_turn(**gt_action, pred_action, sim));
            }
            return json_to_py(aggregate(judgments).to_json());
        },
        py::arg("predictions"), py::arg("ground_truth"),
        "Aggregate turn-level metrics over aligned action lists.");

    m.def(
        "validate_milestones",
        [](const std::string& yaml_text) {
            MilestoneGraph graph = graph_arg(yaml_text);
            py::dict out;
            out["end"] = graph.end_node();
            out["start"] = graph.start_nodes();
            out["milestones"] = static_cast<int>(graph.milestones().size());
            return out;
        },
        py::arg("yaml_text"), "Validate a milestone graph; raises ValueError on defects.");

    m.def(
        "validly_achieved",
        [](const std::string& yaml_text, py::object achieved) {
            return validly_achieved(graph_arg(yaml_text), achieved_arg(achieved));
        },
        py::arg("yaml_text"), py::arg("achieved"),
        "Achieved entries are (milestone, step) pairs.");

    m.def(
        "progress_rate",
        [](const std::string& yaml_text, py::object achieved) {
            return progress_rate(graph_arg(yaml_text), achieved_arg(achieved));
        },
        py::arg("yaml_text"), py::arg("achieved"));

    m.def(
        "goal_completion",
        [](const std::string& yaml_text, py::object achieved) {
            return goal_completion(graph_arg(yaml_text), achieved_arg(achieved));
        },
        py::arg("yaml_text"), py::arg("achieved"));

    m.def(
        "run_turn",
        [](const std::string& instruction, py::object tools, py::object history,
           const std::string& mode, py::function llm, py::dict tool_impls, int max_iterations) {
            PromptBundle bundle;
            bundle.instruction = instruction;
            bundle.tools = tools_from_py(tools);
            for (auto item : history.cast<py::sequence>()) {
                auto pair = item.cast<py::sequence>();
                bundle.history.push_back(
                    {pair[0].cast<std::string>(), pair[1].cast<std::string>()});
            }
            bundle.mode = mode_arg(mode);

            ToolRegistry registry;
            for (const ToolDefinition& def : bundle.tools) {
                if (!tool_impls.contains(def.name)) {
                    throw py::value_error("no implementation for tool '" + def.name + "'");
                }
                py::function impl = tool_impls[py::str(def.name)].cast<py::function>();
                registry.register_tool(def, [impl](const json& args) {
                    try {
                        py::gil_scoped_acquire gil;
                        return ToolResult::ok(impl(json_to_py(args)).cast<std::string>());
                    } catch (const py::error_already_set& e) {
                        return ToolResult::fail(e.what());
                    }
                });
            }

            CallableLlm port(llm);
            RunOptions options;
            options.max_iterations = max_iterations;
            TurnResult result = run_turn(bundle, port, registry, options);
            return json_to_py(result.to_json());
        },
        py::arg("instruction"), py::arg("tools"), py::arg("history"), py::arg("mode"),
        py::arg("llm"), py::arg("tool_impls"), py::arg("max_iterations") = 8,
        "Run one agent turn with a python-callable model and tool implementations.");

    m.attr("__version__") = "0.1.0";
}
