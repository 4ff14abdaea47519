#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace preact {

using json = nlohmann::json;

// Canonical text form of a JSON value: object keys sorted, minimal whitespace.
// nlohmann::json stores objects in key order already, so dump() is canonical.
inline std::string canonical_json(const json& v) { return v.dump(); }

enum class Mode { React, Preact };

inline const char* mode_name(Mode m) { return m == Mode::React ? "react" : "preact"; }

inline std::optional<Mode> mode_from_name(const std::string& s) {
    if (s == "react") return Mode::React;
    if (s == "preact") return Mode::Preact;
    return std::nullopt;
}

enum class ParamType { String, Number, Boolean, Object, Array };

const char* param_type_name(ParamType t);
std::optional<ParamType> param_type_from_name(const std::string& s);

struct ToolParameter {
    std::string name;
    ParamType type = ParamType::String;
    bool required = true;
    std::string description;

    bool operator==(const ToolParameter&) const = default;
};

struct ToolDefinition {
    std::string name;
    std::string description;
    std::vector<ToolParameter> parameters;

    bool operator==(const ToolDefinition&) const = default;
};

// A tool invocation with its arguments held as a canonical JSON object.
struct ToolCall {
    std::string tool_name;
    json arguments = json::object();

    bool operator==(const ToolCall&) const = default;
};

struct FinalAnswer {
    std::string text;

    bool operator==(const FinalAnswer&) const = default;
};

// Exactly one of: invoke a tool, or reply to the user.
struct Action {
    std::variant<ToolCall, FinalAnswer> value;

    bool is_tool_call() const { return std::holds_alternative<ToolCall>(value); }
    bool is_final_answer() const { return std::holds_alternative<FinalAnswer>(value); }
    const ToolCall& tool_call() const { return std::get<ToolCall>(value); }
    const FinalAnswer& final_answer() const { return std::get<FinalAnswer>(value); }

    static Action tool(std::string name, json arguments = json::object()) {
        return Action{ToolCall{std::move(name), std::move(arguments)}};
    }
    static Action final(std::string text) { return Action{FinalAnswer{std::move(text)}}; }

    bool operator==(const Action&) const = default;
};

// Verbatim tool response, recorded byte-exactly.
struct Observation {
    std::string source_tool;
    std::string payload;

    bool operator==(const Observation&) const = default;
};

// The accumulated context C over an agent turn: executed (action, observation)
// pairs in execution order. Append-only.
struct ExecutionContext {
    struct Entry {
        ToolCall action;
        Observation observation;

        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> entries;

    void append(ToolCall action, Observation observation) {
        entries.push_back(Entry{std::move(action), std::move(observation)});
    }
    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    bool operator==(const ExecutionContext&) const = default;
};

enum class StepStatus { Pending, Executed };

struct PlanStep {
    int index = 1;  // 1-based, contiguous within a plan
    std::string thought;
    Action action;
    StepStatus status = StepStatus::Pending;

    bool operator==(const PlanStep&) const = default;
};

// An ordered plan. A complete plan ends with (and only ends with) a
// FinalAnswer step; the text form does not carry execution status.
struct Plan {
    std::vector<PlanStep> steps;

    bool ends_with_final_answer() const {
        return !steps.empty() && steps.back().action.is_final_answer();
    }

    bool operator==(const Plan&) const = default;
};

// Grammar-level failure. `position` is the byte offset into the (stripped)
// input and `line` the 1-based line number where parsing stopped.
struct ParseError {
    enum class Kind { Grammar, AmbiguousFinalAnswer };

    Kind kind = Kind::Grammar;
    std::size_t position = 0;
    int line = 1;
    std::string expected;
    std::string found;

    bool is_ambiguous_final_answer() const { return kind == Kind::AmbiguousFinalAnswer; }
    std::string message() const;
};

struct ChatMessage {
    std::string role;  // "user" | "assistant" | "system"
    std::string text;

    bool operator==(const ChatMessage&) const = default;
};

// Thrown when a PromptBundle violates its own invariants (e.g. history role
// alternation) rather than failing a parse.
struct InvalidBundle : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything needed to render one agent prompt: instruction I, tool
// definitions TD, dialogue history, accumulated context, and the mode.
struct PromptBundle {
    std::string instruction;
    std::vector<ToolDefinition> tools;
    std::vector<ChatMessage> history;  // alternates user/assistant, starts with user
    ExecutionContext context;
    Mode mode = Mode::React;
};

}  // namespace preact
