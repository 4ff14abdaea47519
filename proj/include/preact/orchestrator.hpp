#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "preact/plan.hpp"
#include "preact/result.hpp"
#include "preact/transcript.hpp"

namespace preact {

struct TransportError {
    std::string message;
};

struct LlmRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
};

// Port over a chat-completion backend. Implementations must be deterministic
// at temperature 0 when backed by the scripted provider.
class LlmPort {
public:
    virtual ~LlmPort() = default;
    virtual Result<std::string, TransportError> complete(const LlmRequest& request) = 0;
};

// Outcome of running a tool executor.
struct ToolResult {
    bool success = false;
    std::string value;  // payload on success, error message on failure

    static ToolResult ok(std::string payload) { return {true, std::move(payload)}; }
    static ToolResult fail(std::string error) { return {false, std::move(error)}; }
};

using ToolExecutor = std::function<ToolResult(const json& arguments)>;

class ToolRegistry {
public:
    void register_tool(ToolDefinition definition, ToolExecutor executor);
    bool has_tool(const std::string& name) const;
    const ToolDefinition* find_definition(const std::string& name) const;
    std::vector<ToolDefinition> definitions() const;
    std::size_t size() const { return tools_.size(); }

    // Runs the executor; validation failures and executor errors come back as
    // `ERROR: ...` payloads so the agent loop can observe and adapt.
    Observation execute(const ToolCall& call) const;

private:
    struct Entry {
        ToolDefinition definition;
        ToolExecutor executor;
    };
    std::map<std::string, Entry> tools_;
};

// Validates arguments against a definition: required parameters present,
// declared types respected, no undeclared arguments.
std::optional<std::string> validate_arguments(const ToolDefinition& def, const json& arguments);

enum class TerminatedBy { FinalAnswer, MaxIterations, UnrecoverableError };

const char* terminated_by_name(TerminatedBy t);

struct TurnResult {
    std::string final_answer;
    ExecutionContext context;
    std::vector<Plan> plans;   // one per parsed LLM completion
    int llm_calls = 0;         // equals |plans| + parse_failures
    int parse_failures = 0;
    TerminatedBy terminated_by = TerminatedBy::FinalAnswer;
    std::string error_message;  // set for unrecoverable_error

    json to_json() const;
};

struct RunOptions {
    int max_iterations = 8;
    int parse_retries = 2;  // corrective re-prompts after a ParseError
    std::string model;      // empty: let the provider use its configured model
    double temperature = 0.0;
};

// Executes a single plan step that must be a tool call.
Observation execute_step(const PlanStep& step, const ToolRegistry& registry);

// One agent turn: render prompt -> complete -> parse -> execute the first
// pending step -> append (action, observation) -> repeat, until the plan
// leads with a Final Answer or max_iterations tool calls have run. Plans are
// expected to cover only the remaining work (executed actions are replayed to
// the model through the context section), so the first pending step of each
// fresh plan is its first step.
TurnResult run_turn(const PromptBundle& bundle, LlmPort& llm, const ToolRegistry& registry,
                    const RunOptions& options = {}, TranscriptWriter* transcript = nullptr,
                    int turn_number = 1);

// Multi-turn driver: each user message starts a fresh context; history grows
// by one (user, final_answer) pair per turn. Stops early on an unrecoverable
// turn, retaining partial results.
std::vector<TurnResult> run_conversation(const std::vector<std::string>& user_messages,
                                         const std::string& instruction,
                                         const std::vector<ToolDefinition>& tools, Mode mode,
                                         LlmPort& llm, const ToolRegistry& registry,
                                         const RunOptions& options = {},
                                         TranscriptWriter* transcript = nullptr);

}  // namespace preact
