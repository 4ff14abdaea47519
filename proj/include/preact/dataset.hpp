#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "preact/plan.hpp"
#include "preact/result.hpp"

namespace preact {

// One conversation turn: the user message, zero or more executed
// (function call, function response) pairs, and the assistant reply.
struct Turn {
    std::string user;
    std::vector<ExecutionContext::Entry> calls;
    std::string assistant;
};

struct Conversation {
    std::string instruction;
    std::vector<ToolDefinition> tools;
    std::vector<Turn> turns;
};

struct SchemaError {
    int line = 0;  // 1-based input line for corpus records, 0 when not file-bound
    std::string message;

    std::string to_string() const {
        return (line > 0 ? "line " + std::to_string(line) + ": " : "") + message;
    }
};

// A supervised (input, output) pair. For the preact stage each output step's
// thought is a `<<REASONING:step_k>>` marker to be filled by annotators; k is
// the step's position in the turn's full plan, so the same marker names the
// same reasoning across all pairs of a turn.
struct TrainingPair {
    std::string input;
    std::string output;
    Mode stage = Mode::React;
    struct Placeholder {
        int step = 0;         // position in the turn's full plan (1-based)
        std::string marker;
    };
    std::vector<Placeholder> placeholders;

    json to_json() const;
};

std::string reasoning_marker(int step);

// Validates conversation invariants (nonempty turns, nonempty assistant
// replies, every called tool declared in the tool definitions).
Result<bool, SchemaError> validate_conversation(const Conversation& conv);

// Stage-1 transform: per turn, one pair per function call (minimal
// "Need to invoke tool : <name>" reasoning) plus one terminal final-answer
// pair; a turn without calls yields a single final-answer pair.
Result<std::vector<TrainingPair>, SchemaError> transform_react(const Conversation& conv);

// Stage-2 transform: per turn with n calls, n+1 pairs whose outputs are the
// full remaining plan (renumbered from 1) with reasoning markers for each
// step's thought.
Result<std::vector<TrainingPair>, SchemaError> transform_preact(const Conversation& conv);

// Replaces each recorded marker with the supplied reasoning text.
std::string substitute_placeholders(const TrainingPair& pair,
                                    const std::vector<std::string>& reasonings);

struct Corpus {
    std::vector<Conversation> conversations;
    std::vector<SchemaError> skipped;  // non-strict mode: invalid records, with line numbers
};

Result<Conversation, SchemaError> conversation_from_json(const json& record);
json conversation_to_json(const Conversation& conv);

// JSONL, one conversation per line. In strict mode the first invalid record
// fails the load; otherwise invalid records are skipped and reported.
Result<Corpus, SchemaError> load_corpus(const std::filesystem::path& path, bool strict = true);

Result<bool, SchemaError> write_pairs(const std::vector<TrainingPair>& pairs,
                                      const std::filesystem::path& path);

Result<std::vector<TrainingPair>, SchemaError> load_pairs(const std::filesystem::path& path);

}  // namespace preact
