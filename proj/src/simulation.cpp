#include "preact/simulation.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "preact/grammar.hpp"
#include "preact/prompt.hpp"

namespace preact {

namespace {

std::string read_file(const std::filesystem::path& path, bool& ok) {
    std::ifstream in(path);
    if (!in) {
        ok = false;
        return {};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    ok = true;
    std::string text = buf.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string tool_catalog(const std::vector<ToolDefinition>& tools) {
    std::string out;
    for (const ToolDefinition& tool : tools) {
        out += "- " + tool.name + ": " + tool.description + "\n";
        for (const ToolParameter& p : tool.parameters) {
            out += "  - " + p.name + " (" + param_type_name(p.type) + ", " +
                   (p.required ? "required" : "optional") + "): " + p.description + "\n";
        }
    }
    return out;
}

}  // namespace

Result<UseCase, UseCaseError> load_use_case(const std::filesystem::path& dir) {
    UseCase uc;
    uc.name = dir.filename().string();

    bool ok = false;
    uc.instruction = read_file(dir / "instruction.txt", ok);
    if (!ok) return UseCaseError{"missing " + (dir / "instruction.txt").string()};

    std::ifstream tools_in(dir / "tools.json");
    if (!tools_in) return UseCaseError{"missing " + (dir / "tools.json").string()};
    json tools_doc = json::parse(tools_in, nullptr, false);
    if (tools_doc.is_discarded() || !tools_doc.is_array()) {
        return UseCaseError{"tools.json must be a JSON array"};
    }
    for (const json& t : tools_doc) {
        if (!t.is_object() || !t.contains("name") || !t["name"].is_string()) {
            return UseCaseError{"tool entry needs a string 'name'"};
        }
        ToolDefinition def;
        def.name = t["name"].get<std::string>();
        def.description = t.value("description", std::string{});
        for (const json& p : t.value("parameters", json::array())) {
            ToolParameter param;
            param.name = p.value("name", std::string{});
            auto type = param_type_from_name(p.value("type", std::string("string")));
            if (!type) return UseCaseError{"tool '" + def.name + "': unknown parameter type"};
            param.type = *type;
            param.required = p.value("required", true);
            param.description = p.value("description", std::string{});
            def.parameters.push_back(std::move(param));
        }
        std::string stub = t.value("stub_response", std::string("ok"));
        uc.tools.push_back(def);
        uc.registry.register_tool(def, [stub](const json&) { return ToolResult::ok(stub); });
    }

    bool yaml_ok = false;
    std::string yaml_text = read_file(dir / "milestones.yaml", yaml_ok);
    if (!yaml_ok) return UseCaseError{"missing " + (dir / "milestones.yaml").string()};
    auto graph = parse_milestone_graph(yaml_text);
    if (!graph) return UseCaseError{"milestones.yaml: " + graph.error().to_string()};
    uc.graph = std::move(graph.value());

    // FC milestones must name a registered tool.
    for (const Milestone& m : uc.graph.milestones()) {
        if (m.kind == MilestoneKind::FC && !uc.registry.has_tool(m.name)) {
            return UseCaseError{"FC milestone '" + m.name + "' does not match any tool"};
        }
    }

    bool personas_ok = false;
    std::string personas_text = read_file(dir / "personas.yaml", personas_ok);
    if (!personas_ok) return UseCaseError{"missing " + (dir / "personas.yaml").string()};
    try {
        YAML::Node root = YAML::Load(personas_text);
        if (root.IsMap() && root["personas"]) root = root["personas"];
        if (!root.IsSequence()) return UseCaseError{"personas.yaml must be a list"};
        for (const YAML::Node& node : root) {
            Persona p;
            p.name = node["name"] ? node["name"].as<std::string>() : "user";
            p.description = node["description"] ? node["description"].as<std::string>() : "";
            uc.personas.push_back(std::move(p));
        }
    } catch (const YAML::Exception& e) {
        return UseCaseError{std::string("personas.yaml: ") + e.what()};
    }
    if (uc.personas.empty()) return UseCaseError{"personas.yaml lists no personas"};
    return uc;
}

std::string build_judge_prompt(const std::vector<std::string>& transcript_lines,
                               const MilestoneGraph& graph, const std::string& instruction,
                               const std::vector<ToolDefinition>& tools) {
    std::string out;
    out += "You are evaluating a conversation between a human user and an AI agent that can call tools.\n";
    out += "\n### Agent Task\n";
    out += instruction;
    out += "\n";
    out += "\n### Tools\n";
    out += tool_catalog(tools);
    out += "\n### Milestones\n";
    for (const Milestone& m : graph.milestones()) {
        out += "- " + m.name + " (" + (m.kind == MilestoneKind::FC ? "FC" : "NFC") + "): " +
               m.description;
        if (!m.dependencies.empty()) {
            out += " [depends on: ";
            for (std::size_t i = 0; i < m.dependencies.size(); ++i) {
                if (i) out += ", ";
                out += m.dependencies[i];
            }
            out += m.or_group ? "; any one suffices]" : "]";
        }
        out += "\n";
    }
    out += "\n### Conversation\n";
    for (std::size_t i = 0; i < transcript_lines.size(); ++i) {
        out += std::to_string(i + 1) + ". " + transcript_lines[i] + "\n";
    }
    out += "\n### Task\n";
    out += "Decide which milestones the agent genuinely achieved during the conversation. Be strict: "
           "do not credit a milestone on the basis of hallucinated data, unverified user claims, or "
           "tool calls with missing or invalid parameters; count it only when the conversation shows "
           "it was truly fulfilled, in a valid order.\n";
    out += "Output one line per achieved milestone, in exactly this form:\n";
    out += "<milestone_name>: <step_number>\n";
    out += "where <step_number> is the numbered conversation step where the milestone was first "
           "genuinely fulfilled. Output nothing else. If no milestones were achieved, output "
           "nothing.\n";
    return out;
}

Result<AchievedSet, JudgeFormatError> parse_judge_output(const std::string& text) {
    AchievedSet achieved;
    std::istringstream in(strip_completion(text));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (!t.empty() && t[0] == '-') t = trim(t.substr(1));  // tolerate bulleted lists
        std::size_t colon = t.rfind(':');
        if (colon == std::string::npos || colon == 0) {
            return JudgeFormatError{line_no, line, "expected '<milestone_name>: <step_number>'"};
        }
        std::string name = trim(t.substr(0, colon));
        std::string step_text = trim(t.substr(colon + 1));
        if (name.empty() || step_text.empty() ||
            step_text.find_first_not_of("0123456789") != std::string::npos) {
            return JudgeFormatError{line_no, line, "expected '<milestone_name>: <step_number>'"};
        }
        int step = std::stoi(step_text);
        if (step <= 0) return JudgeFormatError{line_no, line, "step numbers are positive"};
        achieved.entries.push_back({name, step});
    }
    return achieved;
}

json RunDetail::to_json() const {
    json ach = json::array();
    for (const AchievedSet::Entry& e : achieved.entries) {
        ach.push_back(json{{"milestone", e.milestone}, {"step", e.step}});
    }
    json out{{"aborted", aborted},
             {"achieved", ach},
             {"goal_completion", goal_completion},
             {"progress_rate", progress_rate},
             {"run", run},
             {"user_turns", user_turns},
             {"warnings", warnings}};
    if (aborted) out["abort_reason"] = abort_reason;
    return out;
}

json E2EReport::to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json runs_json = json::array();
    for (const RunDetail& r : per_run) runs_json.push_back(r.to_json());
    return json{{"aborted", aborted},
                {"goal_completion", opt(goal_completion)},
                {"goal_completion_std", opt(goal_completion_std)},
                {"per_run", runs_json},
                {"progress_rate", opt(progress_rate)},
                {"progress_rate_std", opt(progress_rate_std)},
                {"runs", runs},
                {"schema_version", 1},
                {"use_case", use_case}};
}

namespace {

std::string user_sim_system_prompt(const Persona& persona) {
    std::string out;
    out += "You are role-playing a customer talking to a support agent.\n";
    out += "\n### Persona\n";
    out += persona.name + ": " + persona.description + "\n";
    out += "\n### Rules\n";
    out += "Reply with exactly one short user message per turn, staying in character.\n";
    out += std::string("When your goal is fully resolved (or you give up), reply with exactly ") +
           kEndToken + " instead of a message.\n";
    return out;
}

RunDetail simulate_one(UseCase& uc, LlmPort& agent, LlmPort& user, LlmPort& judge,
                       const SimulationOptions& options, int run_index) {
    RunDetail detail;
    detail.run = run_index;

    const Persona& persona = uc.personas[(run_index - 1) % uc.personas.size()];
    std::vector<ChatMessage> user_view{{"system", user_sim_system_prompt(persona)}};
    std::vector<ChatMessage> agent_history;
    std::vector<std::string> lines;

    RunOptions run_options;
    run_options.max_iterations = options.max_iterations;
    run_options.parse_retries = options.parse_retries;
    run_options.model = options.model;
    run_options.temperature = options.temperature;

    for (int turn = 1; turn <= options.max_turns; ++turn) {
        auto user_msg =
            user.complete(LlmRequest{options.model, user_view, options.temperature});
        if (!user_msg) {
            detail.aborted = true;
            detail.abort_reason = "user provider: " + user_msg.error().message;
            detail.transcript_lines = lines;
            return detail;
        }
        std::string message = trim(user_msg.value());
        if (message.find(kEndToken) != std::string::npos) break;
        user_view.push_back({"assistant", message});
        lines.push_back("user: " + message);
        ++detail.user_turns;

        agent_history.push_back({"user", message});
        PromptBundle bundle{uc.instruction, uc.tools, agent_history, ExecutionContext{},
                            options.agent_mode};
        TurnResult result;
        try {
            result = run_turn(bundle, agent, uc.registry, run_options, nullptr, turn);
        } catch (const std::exception& e) {
            detail.aborted = true;
            detail.abort_reason = e.what();
            detail.transcript_lines = lines;
            return detail;
        }
        if (result.terminated_by == TerminatedBy::UnrecoverableError) {
            detail.aborted = true;
            detail.abort_reason = result.error_message;
            detail.transcript_lines = lines;
            return detail;
        }
        for (const ExecutionContext::Entry& e : result.context.entries) {
            lines.push_back("assistant: [tool] " + e.action.tool_name + " " +
                            canonical_json(e.action.arguments));
            lines.push_back("tool: " + e.observation.payload);
        }
        lines.push_back("assistant: " + result.final_answer);
        agent_history.push_back({"assistant", result.final_answer});
    }
    detail.transcript_lines = lines;

    std::string judge_prompt = build_judge_prompt(lines, uc.graph, uc.instruction, uc.tools);
    auto judged = judge.complete(LlmRequest{
        options.model, {{"user", judge_prompt}}, 0.0});  // judge runs at temperature 0
    if (!judged) {
        detail.aborted = true;
        detail.abort_reason = "judge provider: " + judged.error().message;
        return detail;
    }
    auto achieved = parse_judge_output(judged.value());
    if (!achieved) {
        detail.warnings.push_back("judge output line " + std::to_string(achieved.error().line) +
                                  " rejected: " + achieved.error().message);
        detail.achieved = AchievedSet{};
    } else {
        detail.achieved = std::move(achieved.value());
    }

    validly_achieved(uc.graph, detail.achieved, &detail.warnings);
    detail.progress_rate = progress_rate(uc.graph, detail.achieved);
    detail.goal_completion = goal_completion(uc.graph, detail.achieved);
    return detail;
}

}  // namespace

E2EReport run_simulation(UseCase& uc, const PortFactory& agent_llm, const PortFactory& user_llm,
                         const PortFactory& judge_llm, const SimulationOptions& options) {
    E2EReport report;
    report.use_case = uc.name;

    double gc_sum = 0.0, pr_sum = 0.0;
    std::vector<double> gc_values, pr_values;
    for (int run = 1; run <= options.n_runs; ++run) {
        auto agent = agent_llm();
        auto user = user_llm();
        auto judge = judge_llm();
        RunDetail detail = simulate_one(uc, *agent, *user, *judge, options, run);
        if (detail.aborted) {
            ++report.aborted;
        } else {
            ++report.runs;
            gc_sum += detail.goal_completion ? 1.0 : 0.0;
            pr_sum += detail.progress_rate;
            gc_values.push_back(detail.goal_completion ? 1.0 : 0.0);
            pr_values.push_back(detail.progress_rate);
        }
        if (!options.artifacts_dir.empty()) {
            std::filesystem::create_directories(options.artifacts_dir);
            std::string stem = "run_" + std::to_string(run);
            std::ofstream t(options.artifacts_dir / (stem + ".transcript.jsonl"));
            for (std::size_t i = 0; i < detail.transcript_lines.size(); ++i) {
                t << json{{"step", i + 1}, {"text", detail.transcript_lines[i]}}.dump() << '\n';
            }
            std::ofstream jf(options.artifacts_dir / (stem + ".judgment.json"));
            jf << detail.to_json().dump(2) << '\n';
        }
        report.per_run.push_back(std::move(detail));
    }

    if (report.runs > 0) {
        double gc_mean = gc_sum / report.runs;
        double pr_mean = pr_sum / report.runs;
        report.goal_completion = gc_mean;
        report.progress_rate = pr_mean;
        double gc_var = 0.0, pr_var = 0.0;
        for (double v : gc_values) gc_var += (v - gc_mean) * (v - gc_mean);
        for (double v : pr_values) pr_var += (v - pr_mean) * (v - pr_mean);
        report.goal_completion_std = std::sqrt(gc_var / report.runs);
        report.progress_rate_std = std::sqrt(pr_var / report.runs);
    }
    return report;
}

Result<DraftResult, TransportError> draft_milestone_graph(const std::string& workflow_text,
                                                          const std::vector<ToolDefinition>& tools,
                                                          LlmPort& llm, const std::string& model,
                                                          double temperature) {
    std::string prompt;
    prompt += "Design a milestone dependency graph for the workflow below.\n";
    prompt += "\n### Workflow\n";
    prompt += workflow_text;
    prompt += "\n";
    prompt += "\n### Tools\n";
    prompt += tool_catalog(tools);
    prompt += "\n### Output Format\n";
    prompt += "Output a YAML list only. Each entry has:\n";
    prompt += "- name: a short identifier\n";
    prompt += "  type: FC when the milestone is one of the tool functions (use the tool name), "
              "NFC for states, conditions, or conversational checkpoints\n";
    prompt += "  description: one sentence\n";
    prompt += "  dependencies: [names that must be achieved first]\n";
    prompt += "  or_group: true when any single dependency suffices (optional, default false)\n";
    prompt += "Milestones must form a directed acyclic graph with exactly one final milestone.\n";
    auto completion = llm.complete(LlmRequest{model, {{"user", prompt}}, temperature});
    if (!completion) return completion.error();

    DraftResult draft;
    draft.yaml_text = strip_completion(completion.value());
    auto parsed = parse_milestone_graph(draft.yaml_text);
    draft.valid = parsed.has_value();
    if (!parsed) draft.validation_error = parsed.error().to_string();
    return draft;
}

}  // namespace preact
