#include "preact/prompt.hpp"

#include "preact/grammar.hpp"

namespace preact {

const char* const kReactDirective =
    "Decide the single next step. Respond in exactly this format:\n"
    "Thought: <your reasoning>\n"
    "Action: <tool name>\n"
    "Action Input: <JSON object with the tool call arguments>\n"
    "or, if you can already answer the user:\n"
    "Thought: <your reasoning>\n"
    "Final Answer: <your reply to the user>";

const char* const kPreactDirective =
    "Plan every remaining step needed to resolve the request. Respond with numbered steps, each in exactly this format:\n"
    "Step <k>:\n"
    "Thought: <your reasoning for this step>\n"
    "Action: <tool name>\n"
    "Action Input: <JSON object with the tool call arguments>\n"
    "Number the steps consecutively starting at 1. The last step must deliver the reply instead of a tool call:\n"
    "Step <k>:\n"
    "Thought: <your reasoning>\n"
    "Final Answer: <your reply to the user>\n"
    "Previously executed actions and their observations are listed above; plan only the remaining steps.";

void validate_bundle(const PromptBundle& bundle) {
    for (std::size_t i = 0; i < bundle.history.size(); ++i) {
        const std::string& role = bundle.history[i].role;
        const char* expected = (i % 2 == 0) ? "user" : "assistant";
        if (role != expected) {
            throw InvalidBundle("history must alternate user/assistant starting with user; entry " +
                                std::to_string(i) + " has role '" + role + "'");
        }
    }
}

std::string render_prompt(const PromptBundle& bundle) {
    validate_bundle(bundle);

    std::string out;
    out += "### Instruction\n";
    out += bundle.instruction;
    out += "\n";

    out += "\n### Tools\n";
    for (const ToolDefinition& tool : bundle.tools) {
        out += "- " + tool.name + ": " + tool.description + "\n";
        for (const ToolParameter& p : tool.parameters) {
            out += "  - " + p.name + " (" + param_type_name(p.type) + ", " +
                   (p.required ? "required" : "optional") + "): " + p.description + "\n";
        }
    }

    out += "\n### Conversation\n";
    for (const ChatMessage& m : bundle.history) {
        out += m.role + ": " + m.text + "\n";
    }

    out += "\n### Execution Context\n";
    for (const ExecutionContext::Entry& e : bundle.context.entries) {
        out += render_context_entry(e);
    }

    out += "\n### Output Format\n";
    out += bundle.mode == Mode::React ? kReactDirective : kPreactDirective;
    out += "\n";
    return out;
}

}  // namespace preact
