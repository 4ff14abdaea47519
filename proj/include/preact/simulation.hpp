#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "preact/milestones.hpp"
#include "preact/orchestrator.hpp"
#include "preact/result.hpp"

namespace preact {

// Token a synthetic user emits (alone) to end the conversation.
inline constexpr const char* kEndToken = "<<END>>";

struct Persona {
    std::string name;
    std::string description;
};

// Everything needed to simulate and judge one scenario: the agent
// instruction, a tool set with (stub) executors, the milestone graph, and the
// personas driving the synthetic user.
struct UseCase {
    std::string name;
    std::string instruction;
    std::vector<ToolDefinition> tools;
    ToolRegistry registry;
    MilestoneGraph graph;
    std::vector<Persona> personas;
};

struct UseCaseError {
    std::string message;
};

// Directory layout: instruction.txt, tools.json, milestones.yaml,
// personas.yaml. Tool entries may carry a "stub_response" used as the
// executor's fixed payload (default "ok").
Result<UseCase, UseCaseError> load_use_case(const std::filesystem::path& dir);

struct JudgeFormatError {
    int line = 0;
    std::string content;
    std::string message;
};

// The judge sees the numbered conversation, the agent's task, the tools, and
// the milestone catalog, and must answer one `<name>: <step>` line per
// achieved milestone.
std::string build_judge_prompt(const std::vector<std::string>& transcript_lines,
                               const MilestoneGraph& graph, const std::string& instruction,
                               const std::vector<ToolDefinition>& tools);

// Accepts `<milestone_name>: <step_number>` lines (blank lines ignored).
// Unknown milestone names are kept; scoring drops them with a warning.
Result<AchievedSet, JudgeFormatError> parse_judge_output(const std::string& text);

struct RunDetail {
    int run = 0;
    bool aborted = false;
    std::string abort_reason;
    bool goal_completion = false;
    double progress_rate = 0.0;
    int user_turns = 0;
    AchievedSet achieved;
    std::vector<std::string> warnings;
    std::vector<std::string> transcript_lines;

    json to_json() const;
};

// Means over completed runs; aborted runs are excluded and counted.
struct E2EReport {
    std::string use_case;
    int runs = 0;
    int aborted = 0;
    std::optional<double> goal_completion;
    std::optional<double> progress_rate;
    std::optional<double> goal_completion_std;
    std::optional<double> progress_rate_std;
    std::vector<RunDetail> per_run;

    json to_json() const;
};

using PortFactory = std::function<std::unique_ptr<LlmPort>()>;

struct SimulationOptions {
    int n_runs = 50;
    int max_turns = 30;
    Mode agent_mode = Mode::Preact;
    int max_iterations = 8;
    int parse_retries = 2;
    std::string model;  // empty: let each provider use its configured model
    double temperature = 0.0;
    std::filesystem::path artifacts_dir;  // per-run transcript/judgment files when set
};

// Alternates synthetic-user messages with agent turns until the user emits
// the end token or max_turns is reached, then judges the transcript and
// scores goal completion and progress rate. Runs are independent; each gets
// fresh ports from the factories.
E2EReport run_simulation(UseCase& use_case, const PortFactory& agent_llm,
                         const PortFactory& user_llm, const PortFactory& judge_llm,
                         const SimulationOptions& options = {});

struct DraftResult {
    std::string yaml_text;
    bool valid = false;
    std::string validation_error;
};

// Asks the model to draft a milestone graph for a workflow; the draft is
// validated but an invalid draft is still returned for hand refinement.
Result<DraftResult, TransportError> draft_milestone_graph(const std::string& workflow_text,
                                                          const std::vector<ToolDefinition>& tools,
                                                          LlmPort& llm,
                                                          const std::string& model = {},
                                                          double temperature = 0.0);

}  // namespace preact
