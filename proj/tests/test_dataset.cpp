#include <doctest.h>

#include "preact/dataset.hpp"
#include "preact/grammar.hpp"
#include "test_support.hpp"

using namespace preact;
using preact::testing::PlanGenerator;

namespace {

Corpus load_fixture_corpus() {
    auto corpus = load_corpus(testing::data_dir() / "corpus_small.jsonl");
    REQUIRE(corpus.has_value());
    return corpus.value();
}

std::string pairs_to_jsonl(const std::vector<TrainingPair>& pairs) {
    std::string out;
    for (const TrainingPair& p : pairs) out += p.to_json().dump() + "\n";
    return out;
}

Conversation random_conversation(PlanGenerator& gen) {
    Conversation conv;
    conv.instruction = "You are a test agent.";
    conv.tools = {
        {"lookup_order", "l", {{"order_id", ParamType::String, true, "id"}}},
        {"check_stock", "c", {{"sku", ParamType::String, true, "sku"}}},
        {"create_ticket", "t", {{"subject", ParamType::String, true, "s"}}},
        {"send_email", "e", {}},
        {"get_weather", "w", {}},
        {"tool_x", "x", {}},
    };
    int turns = 1 + static_cast<int>(gen.rng()() % 3);
    for (int t = 0; t < turns; ++t) {
        Turn turn;
        turn.user = gen.sentence();
        turn.assistant = gen.sentence();
        int calls = static_cast<int>(gen.rng()() % 4);
        for (int c = 0; c < calls; ++c) {
            std::string name = conv.tools[gen.rng()() % conv.tools.size()].name;
            turn.calls.push_back(ExecutionContext::Entry{ToolCall{name, gen.arguments()},
                                                         Observation{name, gen.sentence()}});
        }
        conv.turns.push_back(std::move(turn));
    }
    return conv;
}

// Extracts the context section of a rendered prompt for the prefix law.
std::string context_section(const std::string& prompt) {
    std::size_t begin = prompt.find("### Execution Context\n");
    std::size_t end = prompt.find("\n### Output Format");
    REQUIRE(begin != std::string::npos);
    REQUIRE(end != std::string::npos);
    begin += std::string("### Execution Context\n").size();
    return prompt.substr(begin, end - begin);
}

}  // namespace

TEST_CASE("fixture corpus loads three conversations") {
    Corpus corpus = load_fixture_corpus();
    CHECK(corpus.conversations.size() == 3);
    CHECK(corpus.skipped.empty());
    CHECK(corpus.conversations[0].turns.size() == 1);
    CHECK(corpus.conversations[2].turns.size() == 2);
    CHECK(corpus.conversations[2].turns[1].calls.size() == 2);
}

TEST_CASE("react transform matches the golden file byte for byte") {
    Corpus corpus = load_fixture_corpus();
    std::string out;
    for (const Conversation& conv : corpus.conversations) {
        auto pairs = transform_react(conv);
        REQUIRE(pairs.has_value());
        out += pairs_to_jsonl(pairs.value());
    }
    CHECK(out == testing::read_file(testing::data_dir() / "golden/pairs_react.jsonl"));
}

TEST_CASE("preact transform matches the golden file byte for byte") {
    Corpus corpus = load_fixture_corpus();
    std::string out;
    for (const Conversation& conv : corpus.conversations) {
        auto pairs = transform_preact(conv);
        REQUIRE(pairs.has_value());
        out += pairs_to_jsonl(pairs.value());
    }
    CHECK(out == testing::read_file(testing::data_dir() / "golden/pairs_preact.jsonl"));
}

TEST_CASE("react outputs start with the fixed thoughts") {
    Corpus corpus = load_fixture_corpus();
    auto pairs = transform_react(corpus.conversations[0]);
    REQUIRE(pairs.has_value());
    REQUIRE(pairs->size() == 1);
    CHECK(pairs->at(0).output.rfind("Thought: I know the final answer.\nFinal Answer: ", 0) == 0);
    CHECK(pairs->at(0).placeholders.empty());

    auto with_call = transform_react(corpus.conversations[1]);
    REQUIRE(with_call.has_value());
    REQUIRE(with_call->size() == 2);
    CHECK(with_call->at(0).output.rfind("Thought: Need to invoke tool : get_order_status\n", 0) == 0);
}

TEST_CASE("preact pair shapes: 2 calls give plans of 3, 2, 1 steps") {
    Corpus corpus = load_fixture_corpus();
    const Conversation& conv = corpus.conversations[2];
    auto pairs = transform_preact(conv);
    REQUIRE(pairs.has_value());
    // turn 1 has no calls (1 pair), turn 2 has two calls (3 pairs)
    REQUIRE(pairs->size() == 4);

    auto steps_of = [](const TrainingPair& pair) {
        auto plan = parse_plan(pair.output, Mode::Preact);
        REQUIRE_MESSAGE(plan.has_value(), pair.output);
        return plan->steps.size();
    };
    CHECK(steps_of(pairs->at(0)) == 1);
    CHECK(steps_of(pairs->at(1)) == 3);
    CHECK(steps_of(pairs->at(2)) == 2);
    CHECK(steps_of(pairs->at(3)) == 1);

    // Markers carry the turn-level step index, shared across the turn's pairs.
    CHECK(pairs->at(1).placeholders.size() == 3);
    CHECK(pairs->at(1).placeholders[0].marker == "<<REASONING:step_1>>");
    CHECK(pairs->at(2).placeholders[0].marker == "<<REASONING:step_2>>");
    CHECK(pairs->at(2).placeholders[0].step == 2);
    CHECK(pairs->at(3).placeholders[0].marker == "<<REASONING:step_3>>");
}

TEST_CASE("a turn without calls yields one single-step preact pair") {
    Corpus corpus = load_fixture_corpus();
    auto pairs = transform_preact(corpus.conversations[0]);
    REQUIRE(pairs.has_value());
    REQUIRE(pairs->size() == 1);
    CHECK(pairs->at(0).placeholders.size() == 1);
    auto plan = parse_plan(pairs->at(0).output, Mode::Preact);
    REQUIRE(plan.has_value());
    CHECK(plan->steps.size() == 1);
    CHECK(plan->steps[0].thought == "<<REASONING:step_1>>");
}

TEST_CASE("substituted placeholders parse under the preact grammar") {
    Corpus corpus = load_fixture_corpus();
    for (const Conversation& conv : corpus.conversations) {
        auto pairs = transform_preact(conv);
        REQUIRE(pairs.has_value());
        for (const TrainingPair& pair : pairs.value()) {
            std::vector<std::string> reasonings;
            for (std::size_t i = 0; i < pair.placeholders.size(); ++i) {
                reasonings.push_back("reasoning number " + std::to_string(i + 1));
            }
            std::string filled = substitute_placeholders(pair, reasonings);
            CHECK(filled.find("<<REASONING:") == std::string::npos);
            auto plan = parse_plan(filled, Mode::Preact);
            REQUIRE_MESSAGE(plan.has_value(), filled);
        }
    }
}

TEST_CASE("pair-count and context-prefix laws hold over random conversations") {
    PlanGenerator gen(99);
    for (int i = 0; i < 25; ++i) {
        Conversation conv = random_conversation(gen);

        auto react = transform_react(conv);
        auto preact_pairs = transform_preact(conv);
        REQUIRE(react.has_value());
        REQUIRE(preact_pairs.has_value());

        std::size_t expected = 0;
        for (const Turn& t : conv.turns) expected += t.calls.empty() ? 1 : t.calls.size() + 1;
        CHECK(react->size() == expected);
        CHECK(preact_pairs->size() == expected);

        // Outputs parse under their stage's grammar (react directly, preact as markers).
        for (const TrainingPair& pair : react.value()) {
            CHECK(parse_plan(pair.output, Mode::React).has_value());
        }
        for (const TrainingPair& pair : preact_pairs.value()) {
            CHECK(parse_plan(pair.output, Mode::Preact).has_value());
        }

        // Context-prefix law within each turn's run of pairs.
        for (const auto& pairs : {react.value(), preact_pairs.value()}) {
            std::size_t at = 0;
            for (const Turn& t : conv.turns) {
                std::size_t count = t.calls.empty() ? 1 : t.calls.size() + 1;
                for (std::size_t j = 1; j < count; ++j) {
                    std::string prev = context_section(pairs[at + j - 1].input);
                    std::string next = context_section(pairs[at + j].input);
                    CHECK(next.size() > prev.size());
                    CHECK(next.rfind(prev, 0) == 0);
                }
                at += count;
            }
        }
    }
}

TEST_CASE("empty corpus file loads to an empty corpus") {
    auto path = testing::write_temp("empty_corpus.jsonl", "");
    auto corpus = load_corpus(path);
    REQUIRE(corpus.has_value());
    CHECK(corpus->conversations.empty());
}

TEST_CASE("corpus round-trips through write and load") {
    Corpus corpus = load_fixture_corpus();
    std::string serialized;
    for (const Conversation& conv : corpus.conversations) {
        serialized += conversation_to_json(conv).dump() + "\n";
    }
    auto path = testing::write_temp("roundtrip_corpus.jsonl", serialized);
    auto reloaded = load_corpus(path);
    REQUIRE(reloaded.has_value());
    REQUIRE(reloaded->conversations.size() == corpus.conversations.size());
    for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
        CHECK(conversation_to_json(reloaded->conversations[i]) ==
              conversation_to_json(corpus.conversations[i]));
    }
}

TEST_CASE("a call naming a missing tool is a schema error naming the tool") {
    json record{{"instruction", "i"},
                {"tools", json::array()},
                {"turns", json::array({json{{"user", "u"},
                                            {"assistant", "a"},
                                            {"calls", json::array({json{{"name", "ghost_tool"},
                                                                        {"arguments", json::object()},
                                                                        {"response", "r"}}})}}})}};
    auto conv = conversation_from_json(record);
    REQUIRE(!conv.has_value());
    CHECK(conv.error().message.find("ghost_tool") != std::string::npos);
}

TEST_CASE("strict loads fail on the offending line; lenient skips it") {
    std::string good = testing::read_file(testing::data_dir() / "corpus_small.jsonl");
    std::size_t first_line_end = good.find('\n') + 1;
    std::string mixed = good.substr(0, first_line_end) + "{\"turns\": []}\n" +
                        good.substr(first_line_end);

    auto path = testing::write_temp("mixed_corpus.jsonl", mixed);
    auto strict = load_corpus(path, /*strict=*/true);
    REQUIRE(!strict.has_value());
    CHECK(strict.error().line == 2);

    auto lenient = load_corpus(path, /*strict=*/false);
    REQUIRE(lenient.has_value());
    CHECK(lenient->conversations.size() == 3);
    REQUIRE(lenient->skipped.size() == 1);
    CHECK(lenient->skipped[0].line == 2);
}

TEST_CASE("training pairs round-trip through write and load") {
    Corpus corpus = load_fixture_corpus();
    auto pairs = transform_preact(corpus.conversations[2]);
    REQUIRE(pairs.has_value());
    auto path = testing::write_temp("pairs_roundtrip.jsonl", "");
    REQUIRE(write_pairs(pairs.value(), path).has_value());
    auto reloaded = load_pairs(path);
    REQUIRE(reloaded.has_value());
    REQUIRE(reloaded->size() == pairs->size());
    for (std::size_t i = 0; i < pairs->size(); ++i) {
        CHECK(reloaded->at(i).to_json() == pairs->at(i).to_json());
    }
}
