#include "preact/orchestrator.hpp"

#include <stdexcept>

#include "preact/grammar.hpp"
#include "preact/prompt.hpp"

namespace preact {

const char* terminated_by_name(TerminatedBy t) {
    switch (t) {
        case TerminatedBy::FinalAnswer: return "final_answer";
        case TerminatedBy::MaxIterations: return "max_iterations";
        case TerminatedBy::UnrecoverableError: return "unrecoverable_error";
    }
    return "unrecoverable_error";
}

void ToolRegistry::register_tool(ToolDefinition definition, ToolExecutor executor) {
    if (definition.name.empty()) throw std::invalid_argument("tool name must be nonempty");
    std::string name = definition.name;
    tools_[name] = Entry{std::move(definition), std::move(executor)};
}

bool ToolRegistry::has_tool(const std::string& name) const { return tools_.count(name) > 0; }

const ToolDefinition* ToolRegistry::find_definition(const std::string& name) const {
    auto it = tools_.find(name);
    return it == tools_.end() ? nullptr : &it->second.definition;
}

std::vector<ToolDefinition> ToolRegistry::definitions() const {
    std::vector<ToolDefinition> out;
    out.reserve(tools_.size());
    for (const auto& [_, entry] : tools_) out.push_back(entry.definition);
    return out;
}

std::optional<std::string> validate_arguments(const ToolDefinition& def, const json& arguments) {
    if (!arguments.is_object()) return "arguments must be a JSON object";
    for (const ToolParameter& p : def.parameters) {
        auto it = arguments.find(p.name);
        if (it == arguments.end()) {
            if (p.required) return "missing required parameter '" + p.name + "'";
            continue;
        }
        bool ok = true;
        switch (p.type) {
            case ParamType::String: ok = it->is_string(); break;
            case ParamType::Number: ok = it->is_number(); break;
            case ParamType::Boolean: ok = it->is_boolean(); break;
            case ParamType::Object: ok = it->is_object(); break;
            case ParamType::Array: ok = it->is_array(); break;
        }
        if (!ok) {
            return "parameter '" + p.name + "' must be of type " + param_type_name(p.type);
        }
    }
    for (auto it = arguments.begin(); it != arguments.end(); ++it) {
        bool declared = false;
        for (const ToolParameter& p : def.parameters) {
            if (p.name == it.key()) {
                declared = true;
                break;
            }
        }
        if (!declared) return "unknown parameter '" + it.key() + "'";
    }
    return std::nullopt;
}

Observation ToolRegistry::execute(const ToolCall& call) const {
    auto it = tools_.find(call.tool_name);
    if (it == tools_.end()) {
        return Observation{call.tool_name, "ERROR: unknown tool " + call.tool_name};
    }
    if (auto problem = validate_arguments(it->second.definition, call.arguments)) {
        return Observation{call.tool_name,
                           "ERROR: invalid arguments for " + call.tool_name + ": " + *problem};
    }
    try {
        ToolResult result = it->second.executor(call.arguments);
        if (!result.success) return Observation{call.tool_name, "ERROR: " + result.value};
        return Observation{call.tool_name, result.value};
    } catch (const std::exception& e) {
        return Observation{call.tool_name, std::string("ERROR: ") + e.what()};
    }
}

Observation execute_step(const PlanStep& step, const ToolRegistry& registry) {
    if (!step.action.is_tool_call()) {
        throw std::invalid_argument("execute_step: step action must be a tool call");
    }
    return registry.execute(step.action.tool_call());
}

json TurnResult::to_json() const {
    json ctx = json::array();
    for (const ExecutionContext::Entry& e : context.entries) {
        ctx.push_back(json{{"action", {{"arguments", e.action.arguments}, {"tool", e.action.tool_name}}},
                           {"observation", {{"payload", e.observation.payload},
                                            {"source_tool", e.observation.source_tool}}}});
    }
    json plan_texts = json::array();
    for (const Plan& p : plans) {
        json steps = json::array();
        for (const PlanStep& s : p.steps) {
            json action;
            if (s.action.is_tool_call()) {
                action = {{"arguments", s.action.tool_call().arguments},
                          {"kind", "tool"},
                          {"name", s.action.tool_call().tool_name}};
            } else {
                action = {{"kind", "final"}, {"text", s.action.final_answer().text}};
            }
            steps.push_back(json{{"action", action},
                                 {"index", s.index},
                                 {"status", s.status == StepStatus::Executed ? "executed" : "pending"},
                                 {"thought", s.thought}});
        }
        plan_texts.push_back(json{{"steps", steps}});
    }
    json out{{"context", ctx},
             {"final_answer", final_answer},
             {"llm_calls", llm_calls},
             {"parse_failures", parse_failures},
             {"plans", plan_texts},
             {"terminated_by", terminated_by_name(terminated_by)}};
    if (!error_message.empty()) out["error"] = error_message;
    return out;
}

namespace {

void emit(TranscriptWriter* t, const char* kind, int turn, int iteration, json payload) {
    if (t) t->record(TranscriptEvent{kind, turn, iteration, std::move(payload)});
}

std::string corrective_message(const ParseError& e) {
    return "Your previous reply could not be parsed: " + e.message() +
           ". Reply again following the required output format exactly.";
}

}  // namespace

TurnResult run_turn(const PromptBundle& bundle, LlmPort& llm, const ToolRegistry& registry,
                    const RunOptions& options, TranscriptWriter* transcript, int turn_number) {
    validate_bundle(bundle);
    if (!bundle.context.empty()) {
        throw std::invalid_argument("run_turn: bundle context must be empty at entry");
    }
    for (const ToolDefinition& t : bundle.tools) {
        if (!registry.has_tool(t.name)) {
            throw std::invalid_argument("run_turn: tool '" + t.name + "' not registered");
        }
    }

    TurnResult result;
    PromptBundle working = bundle;

    int iteration = 0;
    while (true) {
        ++iteration;
        std::string prompt = render_prompt(working);
        std::vector<ChatMessage> messages{{"user", prompt}};

        std::optional<Plan> plan;
        ParseError last_error;
        for (int attempt = 0; attempt <= options.parse_retries; ++attempt) {
            emit(transcript, "prompt", turn_number, iteration, messages.back().text);
            auto completion =
                llm.complete(LlmRequest{options.model, messages, options.temperature});
            if (!completion) {
                result.terminated_by = TerminatedBy::UnrecoverableError;
                result.error_message = "provider: " + completion.error().message;
                emit(transcript, "final_answer", turn_number, iteration, result.final_answer);
                return result;
            }
            ++result.llm_calls;
            emit(transcript, "completion", turn_number, iteration, completion.value());
            auto parsed = parse_plan(completion.value(), working.mode);
            if (parsed) {
                plan = std::move(parsed.value());
                break;
            }
            ++result.parse_failures;
            last_error = parsed.error();
            messages.push_back({"assistant", completion.value()});
            messages.push_back({"system", corrective_message(last_error)});
        }
        if (!plan) {
            result.terminated_by = TerminatedBy::UnrecoverableError;
            result.error_message = "parse: " + last_error.message();
            emit(transcript, "final_answer", turn_number, iteration, result.final_answer);
            return result;
        }

        // Plans cover the remaining work, so the first pending step is the
        // first step of this fresh plan.
        PlanStep& step = plan->steps.front();
        if (step.action.is_final_answer()) {
            step.status = StepStatus::Executed;
            result.final_answer = step.action.final_answer().text;
            result.terminated_by = TerminatedBy::FinalAnswer;
            result.plans.push_back(std::move(*plan));
            emit(transcript, "final_answer", turn_number, iteration, result.final_answer);
            return result;
        }

        const ToolCall& call = step.action.tool_call();
        emit(transcript, "tool_call", turn_number, iteration,
             json{{"arguments", call.arguments}, {"tool", call.tool_name}});
        Observation obs = registry.execute(call);
        emit(transcript, "observation", turn_number, iteration,
             json{{"payload", obs.payload}, {"source_tool", obs.source_tool}});
        step.status = StepStatus::Executed;
        working.context.append(call, obs);
        result.context = working.context;
        result.plans.push_back(std::move(*plan));

        if (static_cast<int>(working.context.size()) >= options.max_iterations) {
            result.terminated_by = TerminatedBy::MaxIterations;
            emit(transcript, "final_answer", turn_number, iteration, result.final_answer);
            return result;
        }
    }
}

std::vector<TurnResult> run_conversation(const std::vector<std::string>& user_messages,
                                         const std::string& instruction,
                                         const std::vector<ToolDefinition>& tools, Mode mode,
                                         LlmPort& llm, const ToolRegistry& registry,
                                         const RunOptions& options, TranscriptWriter* transcript) {
    std::vector<TurnResult> results;
    std::vector<ChatMessage> history;
    int turn_number = 0;
    for (const std::string& user : user_messages) {
        ++turn_number;
        history.push_back({"user", user});
        PromptBundle bundle{instruction, tools, history, ExecutionContext{}, mode};
        TurnResult r = run_turn(bundle, llm, registry, options, transcript, turn_number);
        history.push_back({"assistant", r.final_answer});
        bool fatal = r.terminated_by == TerminatedBy::UnrecoverableError;
        results.push_back(std::move(r));
        if (fatal) break;
    }
    return results;
}

}  // namespace preact
