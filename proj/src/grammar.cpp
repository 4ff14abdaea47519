#include "preact/grammar.hpp"

#include <cctype>
#include <stdexcept>

namespace preact {

namespace {

constexpr std::string_view kThought = "Thought: ";
constexpr std::string_view kAction = "Action: ";
constexpr std::string_view kActionInput = "Action Input: ";
constexpr std::string_view kFinalAnswer = "Final Answer: ";

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

// Walks the stripped input one line at a time, remembering byte offsets so
// errors can point at the exact spot.
struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    int line_no = 0;  // line number of the most recently taken line

    bool eof() const { return pos >= text.size(); }

    struct Line {
        std::string_view content;  // without the trailing newline
        std::size_t offset;
        int number;
    };

    Line peek() const {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        return Line{text.substr(pos, end - pos), pos, line_no + 1};
    }

    Line take() {
        Line l = peek();
        pos = l.offset + l.content.size();
        if (pos < text.size() && text[pos] == '\n') ++pos;
        ++line_no;
        return l;
    }

    // Everything from `offset` to the end of input, verbatim.
    std::string_view rest_from(std::size_t offset) const { return text.substr(offset); }
};

ParseError grammar_error(const Cursor::Line& at, std::string expected) {
    ParseError e;
    e.kind = ParseError::Kind::Grammar;
    e.position = at.offset;
    e.line = at.number;
    e.expected = std::move(expected);
    e.found = std::string(at.content.substr(0, 60));
    return e;
}

ParseError eof_error(const Cursor& c, std::string expected) {
    ParseError e;
    e.kind = ParseError::Kind::Grammar;
    e.position = c.text.size();
    e.line = c.line_no + 1;
    e.expected = std::move(expected);
    e.found = "end of input";
    return e;
}

bool valid_identifier(std::string_view s) {
    if (s.empty()) return false;
    for (unsigned char ch : s) {
        if (std::isspace(ch) || std::iscntrl(ch)) return false;
    }
    return true;
}

// Parses `Action: name` + `Action Input: {...}` starting at the Action line.
Result<ToolCall, ParseError> parse_tool_lines(Cursor& cur) {
    Cursor::Line action_line = cur.take();
    std::string_view name = action_line.content.substr(kAction.size());
    if (!valid_identifier(name)) {
        return ParseError{grammar_error(action_line, "a tool name after 'Action: '")};
    }
    if (cur.eof()) {
        return ParseError{eof_error(cur, "'Action Input: <JSON object>'")};
    }
    Cursor::Line input_line = cur.take();
    if (!starts_with(input_line.content, kActionInput)) {
        return ParseError{grammar_error(input_line, "'Action Input: <JSON object>'")};
    }
    std::string_view body = input_line.content.substr(kActionInput.size());
    json args = json::parse(body, nullptr, false);
    if (args.is_discarded() || !args.is_object()) {
        return ParseError{grammar_error(input_line, "a JSON object on the 'Action Input:' line")};
    }
    return ToolCall{std::string(name), std::move(args)};
}

}  // namespace

std::string ParseError::message() const {
    std::string what = kind == Kind::AmbiguousFinalAnswer
                           ? "ambiguous step: both an Action and a Final Answer"
                           : "expected " + expected;
    return "line " + std::to_string(line) + ", offset " + std::to_string(position) + ": " + what +
           (found.empty() ? "" : " (found: '" + found + "')");
}

std::string strip_completion(std::string_view raw) {
    std::string_view s = raw;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (starts_with(s, "```")) {
        std::size_t nl = s.find('\n');
        s = (nl == std::string_view::npos) ? std::string_view{} : s.substr(nl + 1);
    }
    if (s.size() >= 3 && s.substr(s.size() - 3) == "```") {
        std::size_t nl = s.rfind('\n');
        s = (nl == std::string_view::npos) ? std::string_view{} : s.substr(0, nl);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    }
    return std::string(s);
}

Result<Plan, ParseError> parse_plan(std::string_view raw, Mode mode) {
    std::string stripped = strip_completion(raw);
    Cursor cur{stripped};

    Plan plan;

    if (mode == Mode::React) {
        if (cur.eof()) return ParseError{eof_error(cur, "'Thought: <text>'")};
        Cursor::Line thought_line = cur.take();
        if (!starts_with(thought_line.content, kThought)) {
            return ParseError{grammar_error(thought_line, "'Thought: <text>'")};
        }
        std::string thought(thought_line.content.substr(kThought.size()));
        if (cur.eof()) return ParseError{eof_error(cur, "'Action: <tool>' or 'Final Answer: <text>'")};

        Cursor::Line next = cur.peek();
        PlanStep step;
        step.index = 1;
        step.thought = std::move(thought);
        if (starts_with(next.content, kAction)) {
            auto call = parse_tool_lines(cur);
            if (!call) return call.error();
            step.action = Action{std::move(call.value())};
            if (!cur.eof()) {
                Cursor::Line extra = cur.peek();
                if (starts_with(extra.content, kFinalAnswer) || extra.content == "Final Answer:") {
                    ParseError e = grammar_error(extra, "end of input after 'Action Input:'");
                    e.kind = ParseError::Kind::AmbiguousFinalAnswer;
                    return e;
                }
                return ParseError{grammar_error(extra, "end of input after 'Action Input:'")};
            }
        } else if (starts_with(next.content, kFinalAnswer)) {
            std::string_view text = cur.rest_from(next.offset + kFinalAnswer.size());
            if (text.empty()) return ParseError{grammar_error(next, "nonempty text after 'Final Answer: '")};
            step.action = Action::final(std::string(text));
        } else {
            return ParseError{grammar_error(next, "'Action: <tool>' or 'Final Answer: <text>'")};
        }
        plan.steps.push_back(std::move(step));
        return plan;
    }

    // Preact: numbered blocks, terminated by a Final Answer step.
    int expected_index = 1;
    while (true) {
        if (cur.eof()) {
            return ParseError{eof_error(cur, expected_index == 1
                                                 ? "'Step 1:'"
                                                 : "'Step " + std::to_string(expected_index) +
                                                       ":' (a plan must end with a Final Answer step)")};
        }
        Cursor::Line header = cur.take();
        std::string expected_header = "Step " + std::to_string(expected_index) + ":";
        if (header.content != expected_header) {
            return ParseError{grammar_error(header, "'" + expected_header + "'")};
        }
        if (cur.eof()) return ParseError{eof_error(cur, "'Thought: <text>'")};
        Cursor::Line thought_line = cur.take();
        if (!starts_with(thought_line.content, kThought)) {
            return ParseError{grammar_error(thought_line, "'Thought: <text>'")};
        }
        std::string thought(thought_line.content.substr(kThought.size()));
        if (thought.empty()) {
            return ParseError{grammar_error(thought_line, "a nonempty Thought")};
        }
        if (cur.eof()) return ParseError{eof_error(cur, "'Action: <tool>' or 'Final Answer: <text>'")};

        Cursor::Line next = cur.peek();
        PlanStep step;
        step.index = expected_index;
        step.thought = std::move(thought);
        if (starts_with(next.content, kAction)) {
            auto call = parse_tool_lines(cur);
            if (!call) return call.error();
            step.action = Action{std::move(call.value())};
            plan.steps.push_back(std::move(step));
            if (!cur.eof()) {
                Cursor::Line after = cur.peek();
                if (starts_with(after.content, kFinalAnswer) || after.content == "Final Answer:") {
                    ParseError e = grammar_error(after, "'Step " + std::to_string(expected_index + 1) + ":'");
                    e.kind = ParseError::Kind::AmbiguousFinalAnswer;
                    return e;
                }
            }
            ++expected_index;
            continue;
        }
        if (starts_with(next.content, kFinalAnswer)) {
            std::string_view text = cur.rest_from(next.offset + kFinalAnswer.size());
            if (text.empty()) return ParseError{grammar_error(next, "nonempty text after 'Final Answer: '")};
            step.action = Action::final(std::string(text));
            plan.steps.push_back(std::move(step));
            return plan;
        }
        return ParseError{grammar_error(next, "'Action: <tool>' or 'Final Answer: <text>'")};
    }
}

std::string render_plan(const Plan& plan, Mode mode) {
    if (plan.steps.empty()) throw std::invalid_argument("render_plan: empty plan");
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const PlanStep& s = plan.steps[i];
        bool last = i + 1 == plan.steps.size();
        if (s.index != static_cast<int>(i) + 1) {
            throw std::invalid_argument("render_plan: step indices must be contiguous from 1");
        }
        if (!last && s.action.is_final_answer()) {
            throw std::invalid_argument("render_plan: Final Answer before the last step");
        }
        if (s.thought.find('\n') != std::string::npos) {
            throw std::invalid_argument("render_plan: thoughts must be single-line");
        }
    }
    std::string out;
    if (mode == Mode::React) {
        if (plan.steps.size() != 1) {
            throw std::invalid_argument("render_plan: a react plan has exactly one step");
        }
        const PlanStep& s = plan.steps.front();
        out += "Thought: ";
        out += s.thought;
        out += '\n';
        if (s.action.is_tool_call()) {
            const ToolCall& c = s.action.tool_call();
            out += "Action: " + c.tool_name + "\n";
            out += "Action Input: " + canonical_json(c.arguments) + "\n";
        } else {
            out += "Final Answer: " + s.action.final_answer().text;
        }
        return out;
    }

    if (!plan.ends_with_final_answer()) {
        throw std::invalid_argument("render_plan: a preact plan must end with a Final Answer step");
    }
    for (const PlanStep& s : plan.steps) {
        out += "Step " + std::to_string(s.index) + ":\n";
        out += "Thought: ";
        out += s.thought;
        out += '\n';
        if (s.action.is_tool_call()) {
            const ToolCall& c = s.action.tool_call();
            out += "Action: " + c.tool_name + "\n";
            out += "Action Input: " + canonical_json(c.arguments) + "\n";
        } else {
            out += "Final Answer: " + s.action.final_answer().text;
        }
    }
    return out;
}

std::string render_context_entry(const ExecutionContext::Entry& entry) {
    return "Action: " + entry.action.tool_name + "\n" +
           "Action Input: " + canonical_json(entry.action.arguments) + "\n" +
           "Observation: " + entry.observation.payload + "\n";
}

const char* param_type_name(ParamType t) {
    switch (t) {
        case ParamType::String: return "string";
        case ParamType::Number: return "number";
        case ParamType::Boolean: return "boolean";
        case ParamType::Object: return "object";
        case ParamType::Array: return "array";
    }
    return "string";
}

std::optional<ParamType> param_type_from_name(const std::string& s) {
    if (s == "string") return ParamType::String;
    if (s == "number") return ParamType::Number;
    if (s == "boolean") return ParamType::Boolean;
    if (s == "object") return ParamType::Object;
    if (s == "array") return ParamType::Array;
    return std::nullopt;
}

}  // namespace preact
