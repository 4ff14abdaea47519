#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "preact/config.hpp"
#include "preact/dataset.hpp"
#include "preact/eval_turn.hpp"
#include "preact/grammar.hpp"
#include "preact/milestones.hpp"
#include "preact/orchestrator.hpp"
#include "preact/prompt.hpp"
#include "preact/providers.hpp"
#include "preact/simulation.hpp"

namespace {

using namespace preact;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;   // provider/runtime failure
constexpr int kExitBadInput = 2;  // input or validation error

int fail_input(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return kExitBadInput;
}

int fail_runtime(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return kExitRuntime;
}

// POSTs {"a": ..., "b": ...} to the endpoint and reads {"similarity": x}.
class HttpSimilarity : public SimilarityPort {
public:
    explicit HttpSimilarity(std::string url) : url_(std::move(url)) {}

    double score(const std::string& a, const std::string& b) override {
        std::string origin = url_;
        std::string path = "/";
        std::size_t scheme = origin.find("://");
        if (scheme != std::string::npos) {
            std::size_t slash = origin.find('/', scheme + 3);
            if (slash != std::string::npos) {
                path = origin.substr(slash);
                origin = origin.substr(0, slash);
            }
        }
        httplib::Client client(origin);
        auto res = client.Post(path, json{{"a", a}, {"b", b}}.dump(), "application/json");
        if (!res || res->status != 200) {
            throw std::runtime_error("similarity endpoint failed");
        }
        json reply = json::parse(res->body);
        return reply.at("similarity").get<double>();
    }

private:
    std::string url_;
};

Result<std::vector<ToolDefinition>, std::string> load_tool_file(const std::string& path,
                                                                ToolRegistry* registry) {
    std::ifstream in(path);
    if (!in) return std::string("cannot open tools file " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) return std::string("tools file must be a JSON array");
    std::vector<ToolDefinition> tools;
    for (const json& t : doc) {
        if (!t.is_object() || !t.contains("name")) return std::string("tool entry needs a 'name'");
        ToolDefinition def;
        def.name = t["name"].get<std::string>();
        def.description = t.value("description", std::string{});
        for (const json& p : t.value("parameters", json::array())) {
            ToolParameter param;
            param.name = p.value("name", std::string{});
            auto type = param_type_from_name(p.value("type", std::string("string")));
            if (!type) return std::string("tool '" + def.name + "': unknown parameter type");
            param.type = *type;
            param.required = p.value("required", true);
            param.description = p.value("description", std::string{});
            def.parameters.push_back(std::move(param));
        }
        std::string stub = t.value("stub_response", std::string("ok"));
        tools.push_back(def);
        if (registry) {
            registry->register_tool(def, [stub](const json&) { return ToolResult::ok(stub); });
        }
    }
    return tools;
}

// Provider reference: a config id, or inline "scripted:<fixture path>".
Result<PortFactory, std::string> resolve_provider(const Config& config, const std::string& ref) {
    if (ref.rfind("scripted:", 0) == 0) {
        std::filesystem::path fixture = ref.substr(9);
        return PortFactory{[fixture]() -> std::unique_ptr<LlmPort> {
            auto scripted = ScriptedLlm::from_file(fixture);
            if (!scripted) {
                struct Failing : LlmPort {
                    TransportError error;
                    Result<std::string, TransportError> complete(const LlmRequest&) override {
                        return error;
                    }
                };
                auto failing = std::make_unique<Failing>();
                failing->error = scripted.error();
                return failing;
            }
            return std::make_unique<ScriptedLlm>(std::move(scripted.value()));
        }};
    }
    auto factory = config.provider_factory(ref);
    if (!factory) return factory.error().message;
    return factory.value();
}

Result<Config, std::string> load_config_opt(const std::string& path) {
    if (path.empty()) return Config{};
    auto config = Config::load(path);
    if (!config) return config.error().message;
    return config.value();
}

int cmd_transform(const std::string& in_path, const std::string& out_path,
                  const std::string& stage_name, bool lenient) {
    auto stage = mode_from_name(stage_name);
    if (!stage) return fail_input("--stage must be react or preact");
    auto corpus = load_corpus(in_path, /*strict=*/!lenient);
    if (!corpus) return fail_input(corpus.error().to_string());
    for (const SchemaError& skipped : corpus->skipped) {
        std::cerr << "warning: skipped record at " << skipped.to_string() << "\n";
    }
    std::vector<TrainingPair> pairs;
    for (const Conversation& conv : corpus->conversations) {
        auto transformed =
            *stage == Mode::React ? transform_react(conv) : transform_preact(conv);
        if (!transformed) return fail_input(transformed.error().to_string());
        for (TrainingPair& p : transformed.value()) pairs.push_back(std::move(p));
    }
    if (auto written = write_pairs(pairs, out_path); !written) {
        return fail_input(written.error().to_string());
    }
    std::cout << "wrote " << pairs.size() << " pairs to " << out_path << "\n";
    return kExitOk;
}

std::optional<Action> first_action(const std::string& text, Mode mode) {
    auto plan = parse_plan(text, mode);
    if (!plan) return std::nullopt;
    return plan->steps.front().action;
}

// Pairs run sequentially against a single port: one completion per pair, in
// file order, so a scripted fixture lines up with the items.
int cmd_run_pairs(const Config& config, const std::string& provider_ref,
                  const std::string& pairs_path, const std::string& pred_path,
                  const std::string& gt_path, const RunOptions& options) {
    auto pairs = load_pairs(pairs_path);
    if (!pairs) return fail_input(pairs.error().to_string());
    auto factory = resolve_provider(config, provider_ref);
    if (!factory) return fail_input(factory.error());
    auto port = factory.value()();

    const std::vector<TrainingPair>& items = pairs.value();
    std::vector<json> pred_rows(items.size());
    std::vector<json> gt_rows(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const TrainingPair& pair = items[i];
        auto completion = port->complete(
            LlmRequest{options.model, {{"user", pair.input}}, options.temperature});
        if (!completion) return fail_runtime(completion.error().message);
        std::optional<Action> pred = first_action(completion.value(), pair.stage);
        std::optional<Action> gt = first_action(pair.output, pair.stage);
        pred_rows[i] = json{{"action", action_to_json(pred)}, {"id", static_cast<int>(i)}};
        gt_rows[i] = json{{"action", action_to_json(gt)}, {"id", static_cast<int>(i)}};
    }

    std::ofstream pred_out(pred_path), gt_out(gt_path);
    if (!pred_out || !gt_out) return fail_input("cannot write prediction/ground-truth files");
    for (const json& row : pred_rows) pred_out << row.dump() << '\n';
    for (const json& row : gt_rows) gt_out << row.dump() << '\n';
    std::cout << "ran " << items.size() << " pairs\n";
    return kExitOk;
}

int cmd_run_inputs(const Config& config, const std::string& provider_ref,
                   const std::string& inputs_path, const std::string& tools_path,
                   const std::string& transcript_dir, Mode mode, const RunOptions& options,
                   int jobs) {
    ToolRegistry registry;
    std::vector<ToolDefinition> tools;
    if (!tools_path.empty()) {
        auto loaded = load_tool_file(tools_path, &registry);
        if (!loaded) return fail_input(loaded.error());
        tools = std::move(loaded.value());
    }
    auto factory = resolve_provider(config, provider_ref);
    if (!factory) return fail_input(factory.error());

    struct Item {
        json id;
        std::string instruction;
        std::vector<std::string> messages;
    };
    std::vector<Item> items;
    std::ifstream in(inputs_path);
    if (!in) return fail_input("cannot open " + inputs_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            return fail_input(inputs_path + ":" + std::to_string(line_no) + ": invalid JSON object");
        }
        Item item;
        item.id = record.value("id", json(line_no));
        item.instruction = record.value("instruction", std::string{});
        if (record.contains("messages") && record["messages"].is_array()) {
            for (const json& m : record["messages"]) item.messages.push_back(m.get<std::string>());
        } else if (record.contains("message") && record["message"].is_string()) {
            item.messages.push_back(record["message"].get<std::string>());
        } else {
            return fail_input(inputs_path + ":" + std::to_string(line_no) +
                              ": needs 'message' or 'messages'");
        }
        items.push_back(std::move(item));
    }

    if (!transcript_dir.empty()) std::filesystem::create_directories(transcript_dir);

    std::vector<json> summaries(items.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> runtime_failed{false};

    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= items.size()) break;
            const Item& item = items[i];
            auto port = factory.value()();
            std::ofstream sink;
            std::unique_ptr<TranscriptWriter> transcript;
            if (!transcript_dir.empty()) {
                std::string id_text = item.id.is_string() ? item.id.get<std::string>()
                                                          : item.id.dump();
                sink.open(std::filesystem::path(transcript_dir) / ("item_" + id_text + ".jsonl"));
                transcript = std::make_unique<TranscriptWriter>(&sink);
            }
            std::vector<TurnResult> turns =
                run_conversation(item.messages, item.instruction, tools, mode, *port, registry,
                                 options, transcript.get());
            json turn_list = json::array();
            for (const TurnResult& r : turns) {
                turn_list.push_back(r.to_json());
                if (r.terminated_by == TerminatedBy::UnrecoverableError) runtime_failed = true;
            }
            summaries[i] = json{{"id", item.id}, {"turns", turn_list}};
        }
    };

    int n_threads = std::max(1, jobs);
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();

    for (const json& summary : summaries) std::cout << summary.dump() << '\n';
    return runtime_failed ? kExitRuntime : kExitOk;
}

int cmd_chat(const Config& config, const std::string& provider_ref, const std::string& tools_path,
             const std::string& instruction, Mode mode, const RunOptions& options,
             const std::string& transcript_path) {
    ToolRegistry registry;
    std::vector<ToolDefinition> tools;
    if (!tools_path.empty()) {
        auto loaded = load_tool_file(tools_path, &registry);
        if (!loaded) return fail_input(loaded.error());
        tools = std::move(loaded.value());
    }
    auto factory = resolve_provider(config, provider_ref);
    if (!factory) return fail_input(factory.error());
    auto port = factory.value()();

    std::ofstream sink;
    std::unique_ptr<TranscriptWriter> transcript;
    if (!transcript_path.empty()) {
        sink.open(transcript_path);
        transcript = std::make_unique<TranscriptWriter>(&sink);
    }

    std::vector<ChatMessage> history;
    int turn_number = 0;
    std::string line;
    std::cout << "interactive agent; empty line exits\n";
    while (true) {
        std::cout << "you> " << std::flush;
        if (!std::getline(std::cin, line) || line.empty()) break;
        ++turn_number;
        history.push_back({"user", line});
        PromptBundle bundle{instruction, tools, history, ExecutionContext{}, mode};
        TurnResult result =
            run_turn(bundle, *port, registry, options, transcript.get(), turn_number);
        for (const ExecutionContext::Entry& e : result.context.entries) {
            std::cout << "  [" << e.action.tool_name << " " << canonical_json(e.action.arguments)
                      << "] -> " << e.observation.payload << "\n";
        }
        if (result.terminated_by == TerminatedBy::UnrecoverableError) {
            std::cerr << "error: " << result.error_message << "\n";
            return kExitRuntime;
        }
        std::cout << "agent> " << result.final_answer << "\n";
        history.push_back({"assistant", result.final_answer});
    }
    return kExitOk;
}

int cmd_eval_turn(const std::string& pred_path, const std::string& gt_path,
                  const std::string& sim_ref, const std::string& out_path,
                  const std::string& dump_path) {
    std::unique_ptr<SimilarityPort> sim;
    if (sim_ref == "fallback" || sim_ref.empty()) {
        sim = std::make_unique<TfCosineSimilarity>();
    } else if (sim_ref.rfind("http", 0) == 0) {
        sim = std::make_unique<HttpSimilarity>(sim_ref);
    } else {
        return fail_input("--sim must be 'fallback' or an http(s) endpoint");
    }

    auto evaluation = evaluate_file(pred_path, gt_path, *sim);
    if (!evaluation) return fail_input(evaluation.error().message);

    std::string report = evaluation->report.to_json().dump(2) + "\n";
    std::cout << report;
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) return fail_input("cannot write " + out_path);
        out << report;
    }
    if (!dump_path.empty()) {
        std::ofstream dump(dump_path);
        if (!dump) return fail_input("cannot write " + dump_path);
        for (const json& j : evaluation->judgment_dump) dump << j.dump() << '\n';
    }
    return kExitOk;
}

int cmd_eval_e2e(const Config& config, const std::string& use_case_dir, int runs,
                 const std::string& agent_ref, const std::string& user_ref,
                 const std::string& judge_ref, Mode mode, int max_turns, int max_iterations,
                 const std::string& out_path, const std::string& artifacts_dir) {
    auto use_case = load_use_case(use_case_dir);
    if (!use_case) return fail_input(use_case.error().message);

    auto agent = resolve_provider(config, agent_ref);
    if (!agent) return fail_input(agent.error());
    auto user = resolve_provider(config, user_ref);
    if (!user) return fail_input(user.error());
    auto judge = resolve_provider(config, judge_ref);
    if (!judge) return fail_input(judge.error());

    SimulationOptions options;
    options.n_runs = runs;
    options.max_turns = max_turns;
    options.agent_mode = mode;
    options.max_iterations = max_iterations;
    options.temperature = config.defaults.temperature;
    if (!artifacts_dir.empty()) options.artifacts_dir = artifacts_dir;

    E2EReport report =
        run_simulation(use_case.value(), agent.value(), user.value(), judge.value(), options);
    std::string text = report.to_json().dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) return fail_input("cannot write " + out_path);
        out << text;
    }
    if (report.runs == 0 && report.aborted > 0) return kExitRuntime;
    return kExitOk;
}

int cmd_graph_validate(const std::string& path) {
    std::ifstream in(path);
    if (!in) return fail_input("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto graph = parse_milestone_graph(buf.str());
    if (!graph) return fail_input(graph.error().to_string());
    json starts = json::array();
    for (const std::string& s : graph->start_nodes()) starts.push_back(s);
    std::cout << json{{"end", graph->end_node()},
                      {"milestones", graph->milestones().size()},
                      {"start", starts},
                      {"valid", true}}
                     .dump(2)
              << "\n";
    return kExitOk;
}

int cmd_graph_draft(const Config& config, const std::string& workflow_path,
                    const std::string& tools_path, const std::string& provider_ref,
                    const std::string& out_path) {
    std::ifstream in(workflow_path);
    if (!in) return fail_input("cannot open " + workflow_path);
    std::ostringstream buf;
    buf << in.rdbuf();

    std::vector<ToolDefinition> tools;
    if (!tools_path.empty()) {
        auto loaded = load_tool_file(tools_path, nullptr);
        if (!loaded) return fail_input(loaded.error());
        tools = std::move(loaded.value());
    }
    auto factory = resolve_provider(config, provider_ref);
    if (!factory) return fail_input(factory.error());
    auto port = factory.value()();

    auto draft = draft_milestone_graph(buf.str(), tools, *port);
    if (!draft) return fail_runtime(draft.error().message);

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) return fail_input("cannot write " + out_path);
        out << draft->yaml_text << "\n";
    }
    json report{{"valid", draft->valid}};
    if (!draft->valid) report["validation_error"] = draft->validation_error;
    std::cout << report.dump(2) << "\n";
    return kExitOk;  // invalid drafts are kept for hand refinement
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental multi-step planning agent runtime and evaluation harness"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "YAML configuration file")->envname("PREACT_CONFIG");

    // transform
    auto* transform = app.add_subcommand("transform", "Convert a conversation corpus to training pairs");
    std::string t_in, t_out, t_stage = "react";
    bool t_lenient = false;
    transform->add_option("--in", t_in, "Corpus JSONL")->required();
    transform->add_option("--out", t_out, "Output pairs JSONL")->required();
    transform->add_option("--stage", t_stage, "react|preact")->required();
    transform->add_flag("--lenient", t_lenient, "Skip invalid records instead of failing");

    // run
    auto* run = app.add_subcommand("run", "Batch agent execution, or pair-file prediction");
    std::string r_provider, r_inputs, r_pairs, r_tools, r_mode = "react", r_transcript, r_pred,
                              r_gt;
    int r_max_iter = 8, r_jobs = 1;
    run->add_option("--provider", r_provider, "Provider id or scripted:<fixture>")->required();
    run->add_option("--inputs", r_inputs, "JSONL of {id, message|messages}");
    run->add_option("--pairs", r_pairs, "Training-pair JSONL to predict over");
    run->add_option("--tools", r_tools, "tools.json with stub executors");
    run->add_option("--mode", r_mode, "react|preact");
    run->add_option("--max-iter", r_max_iter, "Max tool executions per turn");
    run->add_option("--transcript", r_transcript, "Transcript directory (inputs mode)");
    run->add_option("--pred", r_pred, "Predictions JSONL (pairs mode)");
    run->add_option("--gt", r_gt, "Ground-truth JSONL (pairs mode)");
    run->add_option("--jobs", r_jobs, "Parallel workers (inputs mode)");

    // chat
    auto* chat = app.add_subcommand("chat", "Interactive agent REPL");
    std::string c_provider, c_tools, c_mode = "react", c_instruction, c_transcript;
    int c_max_iter = 8;
    chat->add_option("--provider", c_provider, "Provider id or scripted:<fixture>")->required();
    chat->add_option("--tools", c_tools, "tools.json with stub executors");
    chat->add_option("--mode", c_mode, "react|preact");
    chat->add_option("--instruction", c_instruction, "Agent instruction text");
    chat->add_option("--max-iter", c_max_iter, "Max tool executions per turn");
    chat->add_option("--transcript", c_transcript, "Transcript JSONL file");

    // eval-turn
    auto* eval_turn_cmd = app.add_subcommand("eval-turn", "Turn-level metrics over aligned files");
    std::string e_pred, e_gt, e_sim = "fallback", e_out, e_dump;
    eval_turn_cmd->add_option("--pred", e_pred, "Predictions JSONL")->required();
    eval_turn_cmd->add_option("--gt", e_gt, "Ground-truth JSONL")->required();
    eval_turn_cmd->add_option("--sim", e_sim, "fallback | http(s) similarity endpoint");
    eval_turn_cmd->add_option("--out", e_out, "Write the report JSON here");
    eval_turn_cmd->add_option("--dump", e_dump, "Write per-turn judgments JSONL here");

    // eval-e2e
    auto* eval_e2e_cmd = app.add_subcommand("eval-e2e", "Simulate conversations and score milestones");
    std::string x_dir, x_agent, x_user, x_judge, x_mode = "preact", x_out, x_artifacts;
    int x_runs = 50, x_max_turns = 30, x_max_iter = 8;
    eval_e2e_cmd->add_option("--use-case", x_dir, "Use-case bundle directory")->required();
    eval_e2e_cmd->add_option("--runs", x_runs, "Simulation runs");
    eval_e2e_cmd->add_option("--agent-provider", x_agent, "Agent LLM provider")->required();
    eval_e2e_cmd->add_option("--user-provider", x_user, "Synthetic-user LLM provider")->required();
    eval_e2e_cmd->add_option("--judge-provider", x_judge, "Judge LLM provider")->required();
    eval_e2e_cmd->add_option("--mode", x_mode, "react|preact");
    eval_e2e_cmd->add_option("--max-turns", x_max_turns, "Max user turns per run");
    eval_e2e_cmd->add_option("--max-iter", x_max_iter, "Max tool executions per agent turn");
    eval_e2e_cmd->add_option("--out", x_out, "Write the report JSON here");
    eval_e2e_cmd->add_option("--artifacts", x_artifacts, "Per-run transcript/judgment directory");

    // graph
    auto* graph = app.add_subcommand("graph", "Milestone graph utilities");
    graph->require_subcommand(1);
    auto* graph_validate = graph->add_subcommand("validate", "Validate a milestone YAML file");
    std::string g_file;
    graph_validate->add_option("file", g_file, "milestones.yaml")->required();
    auto* graph_draft = graph->add_subcommand("draft", "Draft a milestone graph with an LLM");
    std::string d_workflow, d_tools, d_provider, d_out;
    graph_draft->add_option("--workflow", d_workflow, "Workflow description file")->required();
    graph_draft->add_option("--tools", d_tools, "tools.json");
    graph_draft->add_option("--provider", d_provider, "Provider id or scripted:<fixture>")->required();
    graph_draft->add_option("--out", d_out, "Write the draft YAML here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    auto config = load_config_opt(config_path);
    if (!config) return fail_input(config.error());

    try {
        if (transform->parsed()) return cmd_transform(t_in, t_out, t_stage, t_lenient);
        if (run->parsed()) {
            auto mode = mode_from_name(r_mode);
            if (!mode) return fail_input("--mode must be react or preact");
            RunOptions options;
            options.max_iterations = r_max_iter;
            options.temperature = config->defaults.temperature;
            if (!r_pairs.empty()) {
                if (r_pred.empty() || r_gt.empty()) {
                    return fail_input("--pairs mode needs --pred and --gt output paths");
                }
                return cmd_run_pairs(*config, r_provider, r_pairs, r_pred, r_gt, options);
            }
            if (r_inputs.empty()) return fail_input("provide --inputs or --pairs");
            return cmd_run_inputs(*config, r_provider, r_inputs, r_tools, r_transcript, *mode,
                                  options, r_jobs);
        }
        if (chat->parsed()) {
            auto mode = mode_from_name(c_mode);
            if (!mode) return fail_input("--mode must be react or preact");
            RunOptions options;
            options.max_iterations = c_max_iter;
            return cmd_chat(*config, c_provider, c_tools, c_instruction, *mode, options,
                            c_transcript);
        }
        if (eval_turn_cmd->parsed()) return cmd_eval_turn(e_pred, e_gt, e_sim, e_out, e_dump);
        if (eval_e2e_cmd->parsed()) {
            auto mode = mode_from_name(x_mode);
            if (!mode) return fail_input("--mode must be react or preact");
            return cmd_eval_e2e(*config, x_dir, x_runs, x_agent, x_user, x_judge, *mode,
                                x_max_turns, x_max_iter, x_out, x_artifacts);
        }
        if (graph_validate->parsed()) return cmd_graph_validate(g_file);
        if (graph_draft->parsed()) {
            return cmd_graph_draft(*config, d_workflow, d_tools, d_provider, d_out);
        }
    } catch (const InvalidBundle& e) {
        return fail_input(e.what());
    } catch (const std::exception& e) {
        return fail_runtime(e.what());
    }
    return kExitBadInput;
}
