"""Smoke tests for the python extension module."""

import json
import os

import pytest

import preact_agents as pa


def data_path(*parts):
    return os.path.join(os.environ["PREACT_TEST_DATA"], *parts)


def test_plan_round_trip():
    plan = {
        "steps": [
            {"index": 1, "thought": "look it up",
             "action": {"kind": "tool", "name": "lookup_order", "arguments": {"order_id": "42"}}},
            {"index": 2, "thought": "answer", "action": {"kind": "final", "text": "All done."}},
        ]
    }
    text = pa.render_plan(plan, mode="preact")
    assert text.startswith("Step 1:\nThought: look it up\n")
    parsed = pa.parse_plan(text, mode="preact")
    assert parsed["steps"][0]["action"]["name"] == "lookup_order"
    assert parsed["steps"][1]["action"]["text"] == "All done."


def test_parse_error_carries_position():
    with pytest.raises(ValueError) as err:
        pa.parse_plan("Step 1:\nAction: foo\nAction Input: {}\n", mode="preact")
    assert "line 2" in str(err.value)


def test_prompt_matches_golden_fixture():
    with open(data_path("golden", "prompt_preact.txt"), encoding="utf-8") as f:
        golden = f.read()
    prompt = pa.render_prompt(
        "You are a helpful assistant for Acme retail support.",
        tools=[{
            "name": "get_order_status",
            "description": "Look up the shipping status of an order.",
            "parameters": [{"name": "order_id", "type": "string", "required": True,
                            "description": "Order identifier."}],
        }],
        history=[("user", "Where is my order 42?")],
        context=[],
        mode="preact",
    )
    assert prompt == golden


def test_transforms_match_pair_count_law():
    with open(data_path("corpus_small.jsonl"), encoding="utf-8") as f:
        conversations = [json.loads(line) for line in f if line.strip()]
    for conv in conversations:
        expected = sum(1 if not t.get("calls") else len(t["calls"]) + 1 for t in conv["turns"])
        assert len(pa.transform_react(conv)) == expected
        preact_pairs = pa.transform_preact(conv)
        assert len(preact_pairs) == expected
        for pair in preact_pairs:
            assert pair["stage"] == "preact"
            assert pair["placeholders"]


def test_turn_metrics():
    assert pa.token_f1("order shipped", "the order shipped") == pytest.approx(0.8)
    assert pa.similarity("same text", "same text") == pytest.approx(1.0)

    judgment = pa.judge_turn(
        {"kind": "tool", "name": "book", "arguments": {"d": "mon"}},
        {"kind": "tool", "name": "book", "arguments": {"d": "tue"}},
    )
    assert judgment["action_match"] is True
    assert judgment["param_match_full"] is False

    report = pa.evaluate(
        [{"kind": "final", "text": "hello there"}],
        [{"kind": "final", "text": "hello there"}],
    )
    assert report["action_recall"] == 1.0
    assert report["counts"]["turns"] == 1


def test_milestone_scoring():
    with open(data_path("milestones", "chain5.yaml"), encoding="utf-8") as f:
        yaml_text = f.read()
    info = pa.validate_milestones(yaml_text)
    assert info["end"] == "E"
    achieved = [("A", 1), ("B", 2), ("C", 3)]
    assert pa.validly_achieved(yaml_text, achieved) == ["A", "B", "C"]
    assert pa.progress_rate(yaml_text, achieved) == pytest.approx(0.5)
    assert pa.goal_completion(yaml_text, achieved) is False

    with pytest.raises(ValueError):
        pa.validate_milestones("- name: a\n  dependencies: [a]\n")


def test_run_turn_with_python_ports():
    replies = iter([
        'Thought: check it\nAction: echo\nAction Input: {"x":"ping"}\n',
        "Thought: done\nFinal Answer: The tool said ping.",
    ])

    def llm(messages):
        assert messages[0][0] == "user"
        return next(replies)

    result = pa.run_turn(
        instruction="Assist.",
        tools=[{"name": "echo", "description": "echo",
                "parameters": [{"name": "x", "type": "string", "required": True,
                                "description": "value"}]}],
        history=[("user", "ping the tool")],
        mode="react",
        llm=llm,
        tool_impls={"echo": lambda args: args["x"]},
    )
    assert result["final_answer"] == "The tool said ping."
    assert result["llm_calls"] == 2
    assert result["terminated_by"] == "final_answer"
    assert result["context"][0]["observation"]["payload"] == "ping"
