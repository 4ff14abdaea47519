#include "preact/eval_turn.hpp"

#include <fstream>

namespace preact {

json TurnJudgment::to_json() const {
    json out{{"action_match", action_match},
             {"gt", action_to_json(gt)},
             {"pred", action_to_json(pred)}};
    out["param_match_full"] = param_match_full ? json(*param_match_full) : json(nullptr);
    out["answer_f1"] = answer_f1 ? json(*answer_f1) : json(nullptr);
    out["answer_sim"] = answer_sim ? json(*answer_sim) : json(nullptr);
    return out;
}

json Level1Counts::to_json() const {
    return json{{"action_matches", action_matches},
                {"gt_final_answers", gt_final_answers},
                {"gt_tool_calls", gt_tool_calls},
                {"params_full_matches", params_full_matches},
                {"parse_errors", parse_errors},
                {"pred_tool_calls", pred_tool_calls},
                {"tool_name_matches", tool_name_matches},
                {"turns", turns}};
}

namespace {

json opt_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json Level1Report::to_json() const {
    return json{{"action_recall", opt_to_json(action_recall)},
                {"counts", counts.to_json()},
                {"final_answer_f1", opt_to_json(final_answer_f1)},
                {"final_answer_sim", opt_to_json(final_answer_sim)},
                {"metadata", {{"tool_f1_averaging", "micro"}}},
                {"params_match_full", opt_to_json(params_match_full)},
                {"schema_version", 1},
                {"tool_f1", opt_to_json(tool_f1)},
                {"tool_precision", opt_to_json(tool_precision)},
                {"tool_recall", opt_to_json(tool_recall)}};
}

TurnJudgment judge_turn(const Action& gt, const std::optional<Action>& pred, SimilarityPort& sim) {
    TurnJudgment j;
    j.gt = gt;
    j.pred = pred;

    if (gt.is_tool_call()) {
        bool pred_is_tool = pred && pred->is_tool_call();
        j.action_match =
            pred_is_tool && pred->tool_call().tool_name == gt.tool_call().tool_name;
        // Numeric values compare by value here ("1.0" == "1"); strings byte-exact.
        j.param_match_full = pred_is_tool && pred->tool_call().arguments == gt.tool_call().arguments;
    } else {
        bool pred_is_final = pred && pred->is_final_answer();
        j.action_match = pred_is_final;
        const std::string& gt_text = gt.final_answer().text;
        if (pred_is_final) {
            j.answer_f1 = token_f1(pred->final_answer().text, gt_text);
            j.answer_sim = sim.score(pred->final_answer().text, gt_text);
        } else {
            j.answer_f1 = 0.0;
            j.answer_sim = 0.0;
        }
    }
    return j;
}

Level1Report aggregate(const std::vector<TurnJudgment>& judgments) {
    Level1Report report;
    Level1Counts& c = report.counts;
    double f1_sum = 0.0, sim_sum = 0.0;

    for (const TurnJudgment& j : judgments) {
        ++c.turns;
        if (j.action_match) ++c.action_matches;
        if (!j.pred) ++c.parse_errors;
        bool pred_tool = j.pred && j.pred->is_tool_call();
        if (pred_tool) ++c.pred_tool_calls;
        if (j.gt.is_tool_call()) {
            ++c.gt_tool_calls;
            if (pred_tool && j.pred->tool_call().tool_name == j.gt.tool_call().tool_name) {
                ++c.tool_name_matches;
                if (j.param_match_full && *j.param_match_full) ++c.params_full_matches;
            }
        } else {
            ++c.gt_final_answers;
            f1_sum += j.answer_f1.value_or(0.0);
            sim_sum += j.answer_sim.value_or(0.0);
        }
    }

    if (c.turns > 0) {
        report.action_recall = static_cast<double>(c.action_matches) / c.turns;
    }
    if (c.pred_tool_calls > 0) {
        report.tool_precision = static_cast<double>(c.tool_name_matches) / c.pred_tool_calls;
    }
    if (c.gt_tool_calls > 0) {
        report.tool_recall = static_cast<double>(c.tool_name_matches) / c.gt_tool_calls;
    }
    if (report.tool_precision && report.tool_recall &&
        (*report.tool_precision + *report.tool_recall) > 0.0) {
        report.tool_f1 = 2.0 * *report.tool_precision * *report.tool_recall /
                         (*report.tool_precision + *report.tool_recall);
    } else if (report.tool_precision && report.tool_recall) {
        report.tool_f1 = 0.0;
    }
    if (c.tool_name_matches > 0) {
        report.params_match_full = static_cast<double>(c.params_full_matches) / c.tool_name_matches;
    }
    if (c.gt_final_answers > 0) {
        report.final_answer_f1 = f1_sum / c.gt_final_answers;
        report.final_answer_sim = sim_sum / c.gt_final_answers;
    }
    return report;
}

Result<std::optional<Action>, std::string> action_from_json(const json& value) {
    if (!value.is_object() || !value.contains("kind") || !value["kind"].is_string()) {
        return std::string("action needs a string 'kind'");
    }
    std::string kind = value["kind"].get<std::string>();
    if (kind == "error") return std::optional<Action>{};
    if (kind == "tool") {
        if (!value.contains("name") || !value["name"].is_string()) {
            return std::string("tool action needs a string 'name'");
        }
        json args = value.value("arguments", json::object());
        if (!args.is_object()) return std::string("'arguments' must be an object");
        return std::optional<Action>{Action::tool(value["name"].get<std::string>(), args)};
    }
    if (kind == "final") {
        if (!value.contains("text") || !value["text"].is_string()) {
            return std::string("final action needs a string 'text'");
        }
        return std::optional<Action>{Action::final(value["text"].get<std::string>())};
    }
    return std::string("unknown action kind '" + kind + "'");
}

json action_to_json(const std::optional<Action>& action) {
    if (!action) return json{{"kind", "error"}};
    if (action->is_tool_call()) {
        return json{{"arguments", action->tool_call().arguments},
                    {"kind", "tool"},
                    {"name", action->tool_call().tool_name}};
    }
    return json{{"kind", "final"}, {"text", action->final_answer().text}};
}

namespace {

struct FileRow {
    json id;
    json action;
};

Result<std::vector<FileRow>, EvalError> read_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return EvalError{EvalError::Kind::Io, 0, "cannot open " + path.string()};
    std::vector<FileRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object() || !record.contains("id") ||
            !record.contains("action")) {
            return EvalError{EvalError::Kind::Schema, line_no,
                             path.string() + ": expected {id, action}"};
        }
        rows.push_back(FileRow{record["id"], record["action"]});
    }
    return rows;
}

}  // namespace

Result<FileEvaluation, EvalError> evaluate_file(const std::filesystem::path& pred_path,
                                                const std::filesystem::path& gt_path,
                                                SimilarityPort& sim) {
    auto preds = read_rows(pred_path);
    if (!preds) return preds.error();
    auto gts = read_rows(gt_path);
    if (!gts) return gts.error();
    if (preds->size() != gts->size()) {
        return EvalError{EvalError::Kind::Alignment, 0,
                         "prediction and ground-truth files differ in length (" +
                             std::to_string(preds->size()) + " vs " + std::to_string(gts->size()) +
                             ")"};
    }

    FileEvaluation out;
    std::vector<TurnJudgment> judgments;
    for (std::size_t i = 0; i < preds->size(); ++i) {
        const FileRow& p = (*preds)[i];
        const FileRow& g = (*gts)[i];
        if (p.id != g.id) {
            return EvalError{EvalError::Kind::Alignment, static_cast<int>(i) + 1,
                             "id mismatch at row " + std::to_string(i + 1) + ": " + p.id.dump() +
                                 " vs " + g.id.dump()};
        }
        auto gt_action = action_from_json(g.action);
        if (!gt_action || !gt_action.value().has_value()) {
            return EvalError{EvalError::Kind::Schema, static_cast<int>(i) + 1,
                             "ground truth row " + std::to_string(i + 1) + ": " +
                                 (gt_action ? "kind 'error' not allowed" : gt_action.error())};
        }
        // A malformed prediction row is scored as a parse failure, not fatal.
        std::optional<Action> pred_action;
        if (auto parsed = action_from_json(p.action)) pred_action = parsed.value();
        TurnJudgment j = judge_turn(**gt_action, pred_action, sim);
        json dump = j.to_json();
        dump["id"] = p.id;
        out.judgment_dump.push_back(std::move(dump));
        judgments.push_back(std::move(j));
    }
    out.report = aggregate(judgments);
    return out;
}

}  // namespace preact
