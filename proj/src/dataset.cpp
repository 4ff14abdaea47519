#include "preact/dataset.hpp"

#include <fstream>

#include "preact/grammar.hpp"
#include "preact/prompt.hpp"

namespace preact {

json TrainingPair::to_json() const {
    json ph = json::array();
    for (const Placeholder& p : placeholders) {
        ph.push_back(json{{"marker", p.marker}, {"step", p.step}});
    }
    return json{{"input", input}, {"output", output}, {"placeholders", ph}, {"stage", mode_name(stage)}};
}

std::string reasoning_marker(int step) { return "<<REASONING:step_" + std::to_string(step) + ">>"; }

Result<bool, SchemaError> validate_conversation(const Conversation& conv) {
    if (conv.turns.empty()) return SchemaError{0, "conversation has no turns"};
    for (std::size_t t = 0; t < conv.turns.size(); ++t) {
        const Turn& turn = conv.turns[t];
        if (turn.assistant.empty()) {
            return SchemaError{0, "turn " + std::to_string(t + 1) + ": assistant reply is empty"};
        }
        for (const ExecutionContext::Entry& call : turn.calls) {
            bool known = false;
            for (const ToolDefinition& def : conv.tools) {
                if (def.name == call.action.tool_name) {
                    known = true;
                    break;
                }
            }
            if (!known) {
                return SchemaError{0, "turn " + std::to_string(t + 1) + ": call references tool '" +
                                          call.action.tool_name + "' missing from tool definitions"};
            }
        }
    }
    return true;
}

namespace {

PromptBundle make_bundle(const Conversation& conv, const std::vector<ChatMessage>& history,
                         ExecutionContext context, Mode mode) {
    return PromptBundle{conv.instruction, conv.tools, history, std::move(context), mode};
}

}  // namespace

Result<std::vector<TrainingPair>, SchemaError> transform_react(const Conversation& conv) {
    if (auto v = validate_conversation(conv); !v) return v.error();

    std::vector<TrainingPair> pairs;
    std::vector<ChatMessage> history;
    for (const Turn& turn : conv.turns) {
        history.push_back({"user", turn.user});
        const std::size_t n = turn.calls.size();
        ExecutionContext context;
        for (std::size_t j = 0; j < n; ++j) {
            const ToolCall& call = turn.calls[j].action;
            TrainingPair pair;
            pair.stage = Mode::React;
            pair.input = render_prompt(make_bundle(conv, history, context, Mode::React));
            Plan step_plan{{PlanStep{1, "Need to invoke tool : " + call.tool_name,
                                     Action{ToolCall{call.tool_name, call.arguments}}}}};
            pair.output = render_plan(step_plan, Mode::React);
            pairs.push_back(std::move(pair));
            context.entries.push_back(turn.calls[j]);
        }
        TrainingPair final_pair;
        final_pair.stage = Mode::React;
        final_pair.input = render_prompt(make_bundle(conv, history, context, Mode::React));
        Plan final_plan{{PlanStep{1, "I know the final answer.", Action::final(turn.assistant)}}};
        final_pair.output = render_plan(final_plan, Mode::React);
        pairs.push_back(std::move(final_pair));
        history.push_back({"assistant", turn.assistant});
    }
    return pairs;
}

Result<std::vector<TrainingPair>, SchemaError> transform_preact(const Conversation& conv) {
    if (auto v = validate_conversation(conv); !v) return v.error();

    std::vector<TrainingPair> pairs;
    std::vector<ChatMessage> history;
    for (const Turn& turn : conv.turns) {
        history.push_back({"user", turn.user});
        const int n = static_cast<int>(turn.calls.size());
        ExecutionContext context;
        for (int j = 1; j <= n + 1; ++j) {
            TrainingPair pair;
            pair.stage = Mode::Preact;
            pair.input = render_prompt(make_bundle(conv, history, context, Mode::Preact));

            // Remaining plan: original steps j..n as tool calls, then the
            // final answer (full-plan step n+1), renumbered from 1.
            Plan plan;
            for (int k = j; k <= n; ++k) {
                const ToolCall& call = turn.calls[k - 1].action;
                plan.steps.push_back(PlanStep{k - j + 1, reasoning_marker(k),
                                              Action{ToolCall{call.tool_name, call.arguments}}});
                pair.placeholders.push_back({k, reasoning_marker(k)});
            }
            plan.steps.push_back(
                PlanStep{n - j + 2, reasoning_marker(n + 1), Action::final(turn.assistant)});
            pair.placeholders.push_back({n + 1, reasoning_marker(n + 1)});
            pair.output = render_plan(plan, Mode::Preact);
            pairs.push_back(std::move(pair));

            if (j <= n) context.entries.push_back(turn.calls[j - 1]);
        }
        history.push_back({"assistant", turn.assistant});
    }
    return pairs;
}

std::string substitute_placeholders(const TrainingPair& pair,
                                    const std::vector<std::string>& reasonings) {
    if (reasonings.size() != pair.placeholders.size()) {
        throw std::invalid_argument("substitute_placeholders: need one reasoning per placeholder");
    }
    std::string out = pair.output;
    for (std::size_t i = 0; i < pair.placeholders.size(); ++i) {
        const std::string& marker = pair.placeholders[i].marker;
        std::size_t at = out.find(marker);
        while (at != std::string::npos) {
            out.replace(at, marker.size(), reasonings[i]);
            at = out.find(marker, at + reasonings[i].size());
        }
    }
    return out;
}

namespace {

Result<std::vector<ToolDefinition>, SchemaError> tools_from_json(const json& arr) {
    if (!arr.is_array()) return SchemaError{0, "'tools' must be an array"};
    std::vector<ToolDefinition> tools;
    for (const json& t : arr) {
        if (!t.is_object() || !t.contains("name") || !t["name"].is_string() ||
            t["name"].get<std::string>().empty()) {
            return SchemaError{0, "tool definition needs a nonempty 'name'"};
        }
        ToolDefinition def;
        def.name = t["name"].get<std::string>();
        for (const ToolDefinition& seen : tools) {
            if (seen.name == def.name) return SchemaError{0, "duplicate tool '" + def.name + "'"};
        }
        def.description = t.value("description", std::string{});
        if (t.contains("parameters")) {
            if (!t["parameters"].is_array()) {
                return SchemaError{0, "tool '" + def.name + "': 'parameters' must be an array"};
            }
            for (const json& p : t["parameters"]) {
                if (!p.is_object() || !p.contains("name") || !p["name"].is_string()) {
                    return SchemaError{0, "tool '" + def.name + "': parameter needs a 'name'"};
                }
                ToolParameter param;
                param.name = p["name"].get<std::string>();
                for (const ToolParameter& seen : def.parameters) {
                    if (seen.name == param.name) {
                        return SchemaError{0, "tool '" + def.name + "': duplicate parameter '" +
                                                  param.name + "'"};
                    }
                }
                auto type = param_type_from_name(p.value("type", std::string("string")));
                if (!type) {
                    return SchemaError{0, "tool '" + def.name + "': unknown parameter type '" +
                                              p.value("type", std::string{}) + "'"};
                }
                param.type = *type;
                param.required = p.value("required", true);
                param.description = p.value("description", std::string{});
                def.parameters.push_back(std::move(param));
            }
        }
        tools.push_back(std::move(def));
    }
    return tools;
}

}  // namespace

Result<Conversation, SchemaError> conversation_from_json(const json& record) {
    if (!record.is_object()) return SchemaError{0, "record must be a JSON object"};
    Conversation conv;
    conv.instruction = record.value("instruction", std::string{});
    auto tools = tools_from_json(record.value("tools", json::array()));
    if (!tools) return tools.error();
    conv.tools = std::move(tools.value());

    if (!record.contains("turns") || !record["turns"].is_array()) {
        return SchemaError{0, "record needs a 'turns' array"};
    }
    for (const json& t : record["turns"]) {
        if (!t.is_object() || !t.contains("user") || !t["user"].is_string() ||
            !t.contains("assistant") || !t["assistant"].is_string()) {
            return SchemaError{0, "turn needs string 'user' and 'assistant' fields"};
        }
        Turn turn;
        turn.user = t["user"].get<std::string>();
        turn.assistant = t["assistant"].get<std::string>();
        for (const json& c : t.value("calls", json::array())) {
            if (!c.is_object() || !c.contains("name") || !c["name"].is_string()) {
                return SchemaError{0, "call needs a string 'name'"};
            }
            json args = c.value("arguments", json::object());
            if (!args.is_object()) return SchemaError{0, "call 'arguments' must be an object"};
            std::string name = c["name"].get<std::string>();
            std::string response = c.value("response", std::string{});
            turn.calls.push_back(
                ExecutionContext::Entry{ToolCall{name, args}, Observation{name, response}});
        }
        conv.turns.push_back(std::move(turn));
    }
    if (auto v = validate_conversation(conv); !v) return v.error();
    return conv;
}

json conversation_to_json(const Conversation& conv) {
    json tools = json::array();
    for (const ToolDefinition& def : conv.tools) {
        json params = json::array();
        for (const ToolParameter& p : def.parameters) {
            params.push_back(json{{"description", p.description},
                                  {"name", p.name},
                                  {"required", p.required},
                                  {"type", param_type_name(p.type)}});
        }
        tools.push_back(
            json{{"description", def.description}, {"name", def.name}, {"parameters", params}});
    }
    json turns = json::array();
    for (const Turn& t : conv.turns) {
        json calls = json::array();
        for (const ExecutionContext::Entry& c : t.calls) {
            calls.push_back(json{{"arguments", c.action.arguments},
                                 {"name", c.action.tool_name},
                                 {"response", c.observation.payload}});
        }
        turns.push_back(json{{"assistant", t.assistant}, {"calls", calls}, {"user", t.user}});
    }
    return json{{"instruction", conv.instruction}, {"tools", tools}, {"turns", turns}};
}

Result<Corpus, SchemaError> load_corpus(const std::filesystem::path& path, bool strict) {
    std::ifstream in(path);
    if (!in) return SchemaError{0, "cannot open " + path.string()};
    Corpus corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        SchemaError err;
        if (record.is_discarded()) {
            err = SchemaError{line_no, "invalid JSON"};
        } else {
            auto conv = conversation_from_json(record);
            if (conv) {
                corpus.conversations.push_back(std::move(conv.value()));
                continue;
            }
            err = SchemaError{line_no, conv.error().message};
        }
        if (strict) return err;
        corpus.skipped.push_back(std::move(err));
    }
    return corpus;
}

Result<bool, SchemaError> write_pairs(const std::vector<TrainingPair>& pairs,
                                      const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) return SchemaError{0, "cannot write " + path.string()};
    for (const TrainingPair& p : pairs) out << p.to_json().dump() << '\n';
    return true;
}

Result<std::vector<TrainingPair>, SchemaError> load_pairs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return SchemaError{0, "cannot open " + path.string()};
    std::vector<TrainingPair> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object() || !record.contains("input") ||
            !record.contains("output") || !record.contains("stage")) {
            return SchemaError{line_no, "expected {input, output, stage, placeholders}"};
        }
        TrainingPair p;
        p.input = record["input"].get<std::string>();
        p.output = record["output"].get<std::string>();
        auto stage = mode_from_name(record["stage"].get<std::string>());
        if (!stage) return SchemaError{line_no, "unknown stage"};
        p.stage = *stage;
        for (const json& ph : record.value("placeholders", json::array())) {
            p.placeholders.push_back({ph.value("step", 0), ph.value("marker", std::string{})});
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

}  // namespace preact
