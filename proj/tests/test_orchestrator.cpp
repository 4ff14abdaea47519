#include <doctest.h>

#include <fstream>

#include "preact/grammar.hpp"
#include "preact/providers.hpp"
#include "test_support.hpp"

using namespace preact;

namespace {

ToolDefinition simple_tool(const std::string& name, const std::string& param) {
    ToolDefinition def;
    def.name = name;
    def.description = "test tool";
    def.parameters = {{param, ParamType::String, true, "test parameter"}};
    return def;
}

// Loads the three-tool fixture definitions and registers stub executors.
void load_registry_from_fixture(ToolRegistry& registry, std::vector<ToolDefinition>& tools) {
    json doc = json::parse(testing::read_file(testing::data_dir() / "tools_3tool.json"));
    for (const json& t : doc) {
        ToolDefinition def;
        def.name = t["name"].get<std::string>();
        def.description = t["description"].get<std::string>();
        for (const json& p : t["parameters"]) {
            def.parameters.push_back({p["name"].get<std::string>(),
                                      *param_type_from_name(p["type"].get<std::string>()),
                                      p["required"].get<bool>(),
                                      p["description"].get<std::string>()});
        }
        std::string stub = t["stub_response"].get<std::string>();
        tools.push_back(def);
        registry.register_tool(def, [stub](const json&) { return ToolResult::ok(stub); });
    }
}

PromptBundle scenario_bundle(const std::vector<ToolDefinition>& tools) {
    PromptBundle bundle;
    bundle.instruction = "You are a support agent for Acme online orders.";
    bundle.tools = tools;
    bundle.history = {{"user", "My order 42 is late. What is going on?"}};
    bundle.mode = Mode::Preact;
    return bundle;
}

std::vector<std::string> scenario_completions() {
    std::vector<std::string> out;
    std::ifstream in(testing::data_dir() / "scripted_3tool.jsonl");
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(json::parse(line)["completion"].get<std::string>());
    }
    return out;
}

}  // namespace

TEST_CASE("immediate final answer: one call, empty context") {
    ScriptedLlm llm({"Thought: nothing to do\nFinal Answer: Hello!"});
    ToolRegistry registry;
    PromptBundle bundle;
    bundle.instruction = "Assist.";
    bundle.mode = Mode::React;
    TurnResult result = run_turn(bundle, llm, registry);
    CHECK(result.llm_calls == 1);
    CHECK(result.plans.size() == 1);
    CHECK(result.context.empty());
    CHECK(result.final_answer == "Hello!");
    CHECK(result.terminated_by == TerminatedBy::FinalAnswer);
}

TEST_CASE("scripted three-tool scenario matches the golden transcript") {
    ToolRegistry registry;
    std::vector<ToolDefinition> tools;
    load_registry_from_fixture(registry, tools);
    std::string golden = testing::read_file(testing::data_dir() / "golden/transcript_3tool.jsonl");

    for (int repeat = 0; repeat < 2; ++repeat) {
        ScriptedLlm llm(scenario_completions());
        TranscriptWriter transcript;
        TurnResult result = run_turn(scenario_bundle(tools), llm, registry, RunOptions{},
                                     &transcript, /*turn_number=*/1);
        CHECK(result.llm_calls == 4);
        CHECK(result.plans.size() == 4);
        CHECK(result.context.size() == 3);
        CHECK(result.terminated_by == TerminatedBy::FinalAnswer);
        CHECK(result.parse_failures == 0);
        CHECK(transcript.to_jsonl() == golden);
        // Executed step of every plan is marked; later steps stay pending.
        for (const Plan& plan : result.plans) {
            CHECK(plan.steps.front().status == StepStatus::Executed);
            for (std::size_t i = 1; i < plan.steps.size(); ++i) {
                CHECK(plan.steps[i].status == StepStatus::Pending);
            }
        }
    }
}

TEST_CASE("turn results serialize deterministically") {
    ToolRegistry registry;
    std::vector<ToolDefinition> tools;
    load_registry_from_fixture(registry, tools);
    std::string first;
    for (int repeat = 0; repeat < 2; ++repeat) {
        ScriptedLlm llm(scenario_completions());
        TurnResult result = run_turn(scenario_bundle(tools), llm, registry);
        std::string serialized = result.to_json().dump();
        if (repeat == 0) {
            first = serialized;
        } else {
            CHECK(serialized == first);
        }
    }
}

TEST_CASE("max_iterations bounds tool executions") {
    ToolRegistry registry;
    std::vector<ToolDefinition> tools;
    load_registry_from_fixture(registry, tools);
    ScriptedLlm llm(scenario_completions());
    RunOptions options;
    options.max_iterations = 2;
    TurnResult result = run_turn(scenario_bundle(tools), llm, registry, options);
    CHECK(result.terminated_by == TerminatedBy::MaxIterations);
    CHECK(result.context.size() == 2);
    CHECK(result.llm_calls == 2);
    CHECK(result.final_answer.empty());
}

TEST_CASE("execute_step runs the registered executor") {
    ToolRegistry registry;
    registry.register_tool(simple_tool("echo", "x"), [](const json& args) {
        return ToolResult::ok(args["x"].get<std::string>());
    });
    PlanStep step{1, "echo it", Action::tool("echo", json{{"x", "a"}})};
    Observation obs = execute_step(step, registry);
    CHECK(obs.source_tool == "echo");
    CHECK(obs.payload == "a");
}

TEST_CASE("unknown tools become ERROR observations, not failures") {
    ToolRegistry registry;
    PlanStep step{1, "t", Action::tool("nope", json::object())};
    Observation obs = execute_step(step, registry);
    CHECK(obs.payload == "ERROR: unknown tool nope");
}

TEST_CASE("argument validation failures become ERROR observations") {
    ToolRegistry registry;
    registry.register_tool(simple_tool("echo", "x"),
                           [](const json&) { return ToolResult::ok("never"); });

    Observation missing = registry.execute(ToolCall{"echo", json::object()});
    CHECK(missing.payload == "ERROR: invalid arguments for echo: missing required parameter 'x'");

    Observation wrong_type = registry.execute(ToolCall{"echo", json{{"x", 7}}});
    CHECK(wrong_type.payload == "ERROR: invalid arguments for echo: parameter 'x' must be of type string");

    Observation unknown = registry.execute(ToolCall{"echo", json{{"x", "a"}, {"y", "b"}}});
    CHECK(unknown.payload == "ERROR: invalid arguments for echo: unknown parameter 'y'");
}

TEST_CASE("throwing executors become ERROR observations") {
    ToolRegistry registry;
    registry.register_tool(simple_tool("boom", "x"), [](const json&) -> ToolResult {
        throw std::runtime_error("backend unavailable");
    });
    Observation obs = registry.execute(ToolCall{"boom", json{{"x", "a"}}});
    CHECK(obs.payload == "ERROR: backend unavailable");

    ToolRegistry failing;
    failing.register_tool(simple_tool("fails", "x"),
                          [](const json&) { return ToolResult::fail("no such record"); });
    CHECK(failing.execute(ToolCall{"fails", json{{"x", "a"}}}).payload == "ERROR: no such record");
}

TEST_CASE("the loop survives ERROR observations") {
    ToolRegistry registry;
    registry.register_tool(simple_tool("flaky", "x"),
                           [](const json&) { return ToolResult::fail("boom"); });
    ToolDefinition def = simple_tool("flaky", "x");
    ScriptedLlm llm({
        "Thought: try the tool\nAction: flaky\nAction Input: {\"x\":\"1\"}\n",
        "Thought: it failed, give up gracefully\nFinal Answer: Could not reach the backend.",
    });
    PromptBundle bundle;
    bundle.instruction = "Assist.";
    bundle.tools = {def};
    bundle.history = {{"user", "run the tool"}};
    bundle.mode = Mode::React;
    TurnResult result = run_turn(bundle, llm, registry);
    CHECK(result.terminated_by == TerminatedBy::FinalAnswer);
    REQUIRE(result.context.size() == 1);
    CHECK(result.context.entries[0].observation.payload == "ERROR: boom");
    CHECK(result.llm_calls == 2);
}

TEST_CASE("parse failures trigger corrective retries") {
    ToolRegistry registry;
    PromptBundle bundle;
    bundle.instruction = "Assist.";
    bundle.mode = Mode::React;

    SUBCASE("a retry rescues the turn") {
        ScriptedLlm llm({"not a plan at all", "Thought: ok\nFinal Answer: Recovered."});
        TurnResult result = run_turn(bundle, llm, registry);
        CHECK(result.terminated_by == TerminatedBy::FinalAnswer);
        CHECK(result.final_answer == "Recovered.");
        CHECK(result.llm_calls == 2);
        CHECK(result.parse_failures == 1);
        CHECK(result.plans.size() == 1);
        // The corrective message quotes the parse error and is appended to the
        // message list alongside the failed completion.
        const auto& requests = llm.requests();
        REQUIRE(requests.size() == 2);
        REQUIRE(requests[1].messages.size() == 3);
        CHECK(requests[1].messages[1].role == "assistant");
        CHECK(requests[1].messages[1].text == "not a plan at all");
        CHECK(requests[1].messages[2].role == "system");
        CHECK(requests[1].messages[2].text.find("could not be parsed") != std::string::npos);
    }

    SUBCASE("retries stay within the same iteration in the transcript") {
        ScriptedLlm llm({"not a plan at all", "Thought: ok\nFinal Answer: Recovered."});
        TranscriptWriter transcript;
        run_turn(bundle, llm, registry, RunOptions{}, &transcript);
        std::vector<std::string> kinds;
        for (const TranscriptEvent& e : transcript.events()) {
            kinds.push_back(e.kind);
            CHECK(e.iteration == 1);
        }
        CHECK(kinds == std::vector<std::string>{"prompt", "completion", "prompt", "completion",
                                                "final_answer"});
    }

    SUBCASE("exhausted retries end the turn unrecoverably") {
        ScriptedLlm llm({"junk 1", "junk 2", "junk 3"});
        TurnResult result = run_turn(bundle, llm, registry);
        CHECK(result.terminated_by == TerminatedBy::UnrecoverableError);
        CHECK(result.llm_calls == 3);  // initial + R=2 retries
        CHECK(result.parse_failures == 3);
        CHECK(result.plans.empty());
        CHECK(!result.error_message.empty());
    }

    SUBCASE("transport errors are unrecoverable") {
        ScriptedLlm llm({});
        TurnResult result = run_turn(bundle, llm, registry);
        CHECK(result.terminated_by == TerminatedBy::UnrecoverableError);
        CHECK(result.error_message.find("script exhausted") != std::string::npos);
    }
}

TEST_CASE("run_conversation accumulates history") {
    ToolRegistry registry;
    ScriptedLlm llm({
        "Thought: greet\nFinal Answer: Hello there!",
        "Thought: answer\nFinal Answer: We close at nine.",
    });
    std::vector<TurnResult> results = run_conversation(
        {"hi", "when do you close?"}, "Assist.", {}, Mode::React, llm, registry);
    REQUIRE(results.size() == 2);
    CHECK(results[0].final_answer == "Hello there!");
    CHECK(results[1].final_answer == "We close at nine.");

    // The second turn's prompt contains the first exchange.
    const auto& requests = llm.requests();
    REQUIRE(requests.size() == 2);
    CHECK(requests[1].messages[0].text.find("user: hi\nassistant: Hello there!\nuser: when do you close?") !=
          std::string::npos);
}

TEST_CASE("run_conversation with no messages yields no results") {
    ToolRegistry registry;
    ScriptedLlm llm({});
    CHECK(run_conversation({}, "Assist.", {}, Mode::React, llm, registry).empty());
}

TEST_CASE("a turn ended by max_iterations still records an assistant entry") {
    ToolRegistry registry;
    registry.register_tool(simple_tool("spin", "x"),
                           [](const json&) { return ToolResult::ok("again"); });
    ScriptedLlm llm({
        "Thought: loop\nAction: spin\nAction Input: {\"x\":\"1\"}\n",
        "Thought: loop\nAction: spin\nAction Input: {\"x\":\"1\"}\n",
        "Thought: wrap up\nFinal Answer: Done now.",
    });
    RunOptions options;
    options.max_iterations = 2;
    std::vector<TurnResult> results =
        run_conversation({"go", "and now?"}, "Assist.", {simple_tool("spin", "x")}, Mode::React,
                         llm, registry, options);
    REQUIRE(results.size() == 2);
    CHECK(results[0].terminated_by == TerminatedBy::MaxIterations);
    CHECK(results[1].terminated_by == TerminatedBy::FinalAnswer);
    // Turn 2's prompt records turn 1's (empty) answer in the history.
    const auto& requests = llm.requests();
    CHECK(requests.back().messages[0].text.find("user: go\nassistant: \nuser: and now?") !=
          std::string::npos);
}

TEST_CASE("unrecoverable turns retain partial conversation results") {
    ToolRegistry registry;
    ScriptedLlm llm({"Thought: ok\nFinal Answer: First.", "garbage", "garbage", "garbage"});
    std::vector<TurnResult> results =
        run_conversation({"one", "two", "three"}, "Assist.", {}, Mode::React, llm, registry);
    REQUIRE(results.size() == 2);
    CHECK(results[0].terminated_by == TerminatedBy::FinalAnswer);
    CHECK(results[1].terminated_by == TerminatedBy::UnrecoverableError);
}

TEST_CASE("run_turn preconditions") {
    ToolRegistry registry;
    ScriptedLlm llm({});
    PromptBundle bundle;
    bundle.mode = Mode::React;
    bundle.context.append(ToolCall{"x", json::object()}, Observation{"x", "y"});
    CHECK_THROWS_AS(run_turn(bundle, llm, registry), std::invalid_argument);

    PromptBundle missing_tool;
    missing_tool.tools = {simple_tool("ghost", "x")};
    CHECK_THROWS_AS(run_turn(missing_tool, llm, registry), std::invalid_argument);
}

TEST_CASE("scripted provider loads fixtures and reports exhaustion") {
    auto loaded = ScriptedLlm::from_file(testing::data_dir() / "scripted_3tool.jsonl");
    REQUIRE(loaded.has_value());
    ScriptedLlm llm(std::move(loaded.value()));
    for (int i = 0; i < 4; ++i) {
        CHECK(llm.complete(LlmRequest{"m", {}, 0.0}).has_value());
    }
    auto exhausted = llm.complete(LlmRequest{"m", {}, 0.0});
    REQUIRE(!exhausted.has_value());
    CHECK(exhausted.error().message.find("script exhausted") != std::string::npos);

    auto missing = ScriptedLlm::from_file(testing::data_dir() / "does_not_exist.jsonl");
    CHECK(!missing.has_value());
}
