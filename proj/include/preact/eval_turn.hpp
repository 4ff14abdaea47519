#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "preact/plan.hpp"
#include "preact/result.hpp"
#include "preact/text_metrics.hpp"

namespace preact {

// Per-turn comparison of a predicted action against ground truth.
// param_match_full is defined iff the ground truth is a tool call; the answer
// metrics are defined iff the ground truth is a final answer.
struct TurnJudgment {
    Action gt;
    std::optional<Action> pred;  // nullopt: the prediction failed to parse
    bool action_match = false;
    std::optional<bool> param_match_full;
    std::optional<double> answer_f1;
    std::optional<double> answer_sim;

    json to_json() const;
};

struct Level1Counts {
    int turns = 0;
    int action_matches = 0;
    int gt_tool_calls = 0;
    int pred_tool_calls = 0;
    int tool_name_matches = 0;   // both sides tool calls with equal names
    int params_full_matches = 0; // among tool_name_matches
    int gt_final_answers = 0;
    int parse_errors = 0;

    json to_json() const;
};

// Aggregates mirroring the turn-level metric columns. Ratios are absent
// (reported as null) when their denominator is zero; the denominators are
// always reported in `counts`. Tool F1 is micro-averaged.
struct Level1Report {
    std::optional<double> action_recall;
    std::optional<double> tool_precision;
    std::optional<double> tool_recall;
    std::optional<double> tool_f1;
    std::optional<double> params_match_full;
    std::optional<double> final_answer_f1;
    std::optional<double> final_answer_sim;
    Level1Counts counts;

    json to_json() const;
};

// Total function: a missing/unparseable prediction scores as all-miss.
TurnJudgment judge_turn(const Action& gt, const std::optional<Action>& pred, SimilarityPort& sim);

Level1Report aggregate(const std::vector<TurnJudgment>& judgments);

struct EvalError {
    enum class Kind { Io, Schema, Alignment };
    Kind kind = Kind::Io;
    int line = 0;
    std::string message;
};

// Action wire form: {kind: "tool"|"final"|"error", name?, arguments?, text?}.
Result<std::optional<Action>, std::string> action_from_json(const json& value);
json action_to_json(const std::optional<Action>& action);

struct FileEvaluation {
    Level1Report report;
    std::vector<json> judgment_dump;  // one object per turn, aligned with input order
};

// Reads aligned prediction/ground-truth JSONL files ({id, action}); ids must
// match line by line or the evaluation fails with an alignment error.
Result<FileEvaluation, EvalError> evaluate_file(const std::filesystem::path& pred_path,
                                                const std::filesystem::path& gt_path,
                                                SimilarityPort& sim);

}  // namespace preact
