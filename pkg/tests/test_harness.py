from pathlib import Path

import pytest

from workcell.errors import ScriptStuck
from workcell.harness import (
    Scenario,
    ScenarioRunner,
    load_scenario,
    match_patterns,
    parse_scenario,
    render_trace,
    run_scenario,
)
from workcell.messaging.acl import Performative

FIXTURES = Path(__file__).parent / "fixtures"


def canonical():
    return load_scenario(FIXTURES / "canonical.scenario")


class TestScenarioFormat:
    def test_parse_sections(self):
        scenario = canonical()
        assert scenario.name == "canonical_three_step"
        assert [p.task_name for p in scenario.profiles] == ["pick_base", "pick_screen"]
        assert scenario.recipes[0].name == "laptop_v1"
        assert scenario.script[0] == "register w1 bench-3 assembly"
        assert scenario.expected[0].performative is Performative.AGREE

    def test_unknown_line_rejected(self):
        with pytest.raises(ValueError):
            parse_scenario("nonsense here\n")


class TestRun:
    def test_canonical_passes(self):
        result = run_scenario(canonical())
        assert result.passed, result.divergence

    def test_counts_match_protocol_law(self):
        result = run_scenario(canonical())
        counts = {}
        for record in result.records:
            key = record.message.performative
            counts[key] = counts.get(key, 0) + 1
        assert counts[Performative.AGREE] == 1
        assert counts[Performative.ACCEPT_PROPOSAL] == 2
        assert counts[Performative.PROPOSE] == 3
        assert counts[Performative.REJECT_PROPOSAL] == 1

    def test_deterministic_trace(self):
        first = run_scenario(canonical())
        second = run_scenario(canonical())
        assert first.trace_lines == second.trace_lines

    def test_empty_script_empty_trace(self):
        result = run_scenario(Scenario("empty"))
        assert result.passed
        assert result.records == []

    def test_divergence_reported(self):
        scenario = canonical()
        scenario.expected.append(scenario.expected[0])  # a second Agree never happens
        result = run_scenario(scenario)
        assert not result.passed
        assert "never matched" in result.divergence

    def test_stuck_script_raises(self):
        scenario = Scenario("bad", script=["enqueue missing_recipe"])
        with pytest.raises(ScriptStuck):
            run_scenario(scenario)

    def test_teaching_scenario(self):
        result = run_scenario(load_scenario(FIXTURES / "teaching.scenario"))
        assert result.passed, result.divergence
        teach = [r for r in result.records
                 if r.message.conversation_id.startswith("teach/")]
        assert len(teach) == 8


class TestTwoPlatformMode:
    def test_identical_logical_trace(self):
        in_process = run_scenario(canonical())
        over_tcp = run_scenario(canonical(), two_platform=True)
        assert over_tcp.passed
        assert in_process.trace_lines == over_tcp.trace_lines

    def test_robot_death_fails_order_and_recovers(self):
        scenario = load_scenario(FIXTURES / "robot_death.scenario")
        for tcp in (False, True):
            result = run_scenario(scenario, two_platform=tcp)
            assert result.passed, result.divergence
            orders = {o["order_id"]: o["status"] for o in result.snapshot["orders"]}
            assert orders == {"o1": "Failed", "o2": "Completed"}


class TestPatternMatching:
    def test_subsequence_semantics(self):
        result = run_scenario(canonical())
        sparse = [canonical().expected[0], canonical().expected[-1]]
        ok, divergence = match_patterns(sparse, result.records)
        assert ok, divergence

    def test_render_masks_timestamps(self):
        from workcell.harness import render_record
        from workcell.messaging.acl import AclMessage, AgentId, ContentPayload
        from workcell.messaging.bus import SnifferRecord
        base = AclMessage(Performative.INFORM, AgentId("a", "p"),
                          (AgentId("b", "p"),), "c", ContentPayload.status("x"))
        early = SnifferRecord(base.stamped(seq=1, sent_at=100), 100, 1)
        late = SnifferRecord(base.stamped(seq=9, sent_at=9999), 9999, 42)
        assert render_record(early) == render_record(late)
