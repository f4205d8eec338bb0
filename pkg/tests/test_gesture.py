import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from workcell.errors import InvalidFrame, OutOfOrderFrame
from workcell.gesture import (
    ClassifierConfig,
    GestureEvent,
    HandFrame,
    HandObs,
    HandType,
    StreamFolder,
    SwipeObs,
    WorkerSignal,
    classify,
    fold_stream,
    format_frame,
    meaning,
    parse_frame,
    read_frame_log,
    synth_frame,
    write_frame_log,
)


def hand(x, y, pitch=0.0, hand_type=HandType.RIGHT):
    z = math.sqrt(max(0.0, 1.0 - x * x - y * y))
    return HandObs(hand_type, pitch, (x, y, z))


def frame(frame_id=0, hands=(), tools=0, swipes=()):
    return HandFrame(frame_id, frame_id / 300.0, hands=hands,
                     tool_count=tools, swipes=swipes)


class TestClassify:
    def test_pick_region(self):
        assert classify(frame(hands=(hand(0.3, -0.6, pitch=80),))) is GestureEvent.PICK

    def test_place_region(self):
        assert classify(frame(hands=(hand(-0.3, -0.6),))) is GestureEvent.PLACE

    def test_swipe_beats_pick(self):
        both = frame(hands=(hand(0.3, -0.6),), swipes=(SwipeObs(-0.4, 300.0),))
        assert classify(both) is GestureEvent.SWIPE_LEFT

    def test_swipe_direction_split(self):
        assert classify(frame(swipes=(SwipeObs(0.1, 300.0),))) is GestureEvent.SWIPE_RIGHT
        assert classify(frame(swipes=(SwipeObs(-0.1, 300.0),))) is GestureEvent.SWIPE_LEFT

    def test_tool_beats_hand_posture(self):
        assert classify(frame(hands=(hand(0.3, -0.6),), tools=1)) is GestureEvent.TOOL

    def test_lean_backward_above_pitch_threshold(self):
        assert classify(frame(hands=(hand(0.0, 0.2, pitch=40),))) is GestureEvent.LEAN_BACKWARD

    def test_lean_forward_at_or_below_threshold(self):
        assert classify(frame(hands=(hand(0.0, 0.2, pitch=10),))) is GestureEvent.LEAN_FORWARD

    def test_empty_frame_is_none(self):
        assert classify(frame()) is None

    def test_boundary_x_exactly_threshold_is_not_pick(self):
        assert classify(frame(hands=(hand(0.2, -0.6, pitch=10),))) is GestureEvent.LEAN_FORWARD

    def test_boundary_y_exactly_threshold_is_eligible(self):
        assert classify(frame(hands=(hand(0.3, -0.5),))) is GestureEvent.PICK

    def test_boundary_pitch_exactly_threshold_is_lean_forward(self):
        assert classify(frame(hands=(hand(0.0, 0.2, pitch=35.0),))) is GestureEvent.LEAN_FORWARD

    def test_non_unit_arm_dir_rejected(self):
        bad = HandObs(HandType.LEFT, 0.0, (0.5, 0.5, 0.5))
        with pytest.raises(InvalidFrame):
            classify(frame(hands=(bad,)))

    def test_pitch_out_of_range_rejected(self):
        bad = HandObs(HandType.LEFT, 120.0, (0.0, 0.0, 1.0))
        with pytest.raises(InvalidFrame):
            classify(frame(hands=(bad,)))

    def test_swipe_min_speed_config(self):
        cfg = ClassifierConfig(swipe_min_speed=100.0)
        slow = frame(swipes=(SwipeObs(0.5, 50.0),))
        assert classify(slow, cfg) is None


class TestMeaning:
    def test_table_is_total(self):
        want = {
            GestureEvent.PICK: WorkerSignal.TASK_STARTED,
            GestureEvent.PLACE: WorkerSignal.TASK_IN_PROGRESS,
            GestureEvent.SWIPE_RIGHT: WorkerSignal.TASK_DONE,
            GestureEvent.SWIPE_LEFT: WorkerSignal.WORKER_UNAVAILABLE,
            GestureEvent.LEAN_BACKWARD: WorkerSignal.TASK_PAUSED,
            GestureEvent.LEAN_FORWARD: WorkerSignal.TASK_RESUMED,
            GestureEvent.TOOL: WorkerSignal.NEEDS_ASSISTANT,
        }
        for gesture in GestureEvent:
            assert meaning(gesture) is want[gesture]


class TestSynthFrame:
    @pytest.mark.parametrize("gesture", list(GestureEvent))
    def test_round_trip(self, gesture):
        assert classify(synth_frame(gesture)) is gesture


class TestFoldStream:
    def test_held_gesture_emits_once(self):
        frames = [synth_frame(GestureEvent.PICK, frame_id=i) for i in range(300)]
        assert list(fold_stream(frames)) == [GestureEvent.PICK]

    def test_gap_retriggers(self):
        frames = ([synth_frame(GestureEvent.PICK, frame_id=i) for i in range(10)]
                  + [frame(frame_id=10 + i) for i in range(5)]
                  + [synth_frame(GestureEvent.PICK, frame_id=15 + i) for i in range(10)])
        assert list(fold_stream(frames)) == [GestureEvent.PICK, GestureEvent.PICK]

    def test_scripted_sequence(self):
        script = [GestureEvent.PICK] * 4 + [GestureEvent.PLACE] * 4 + [GestureEvent.SWIPE_RIGHT] * 4
        frames = [synth_frame(g, frame_id=i) for i, g in enumerate(script)]
        assert list(fold_stream(frames)) == [GestureEvent.PICK, GestureEvent.PLACE,
                                             GestureEvent.SWIPE_RIGHT]

    def test_matches_collapse_runs_oracle(self):
        rng = random.Random(5)
        choices = list(GestureEvent) + [None, None]
        script = [rng.choice(choices) for _ in range(400)]
        frames = [synth_frame(g, frame_id=i) if g else frame(frame_id=i)
                  for i, g in enumerate(script)]
        collapsed = []
        for g in script:
            if g is not None and (not collapsed or g != collapsed[-1][0]):
                collapsed.append((g, True))
            elif g is None:
                collapsed.append((None, False))
        oracle = []
        prev = object()
        for g in script:
            if g is not None and g != prev:
                oracle.append(g)
            prev = g
        assert list(fold_stream(frames)) == oracle

    def test_out_of_order_frame_rejected(self):
        frames = [frame(frame_id=2), frame(frame_id=1)]
        with pytest.raises(OutOfOrderFrame):
            list(fold_stream(frames))

    def test_no_equal_consecutive_events_without_gaps(self):
        rng = random.Random(11)
        script = [rng.choice(list(GestureEvent)) for _ in range(500)]
        frames = [synth_frame(g, frame_id=i) for i, g in enumerate(script)]
        events = list(fold_stream(frames))
        assert all(a != b for a, b in zip(events, events[1:]))

    def test_incremental_folder_matches_batch(self):
        rng = random.Random(7)
        script = [rng.choice(list(GestureEvent) + [None]) for _ in range(200)]
        frames = [synth_frame(g, frame_id=i) if g else frame(frame_id=i)
                  for i, g in enumerate(script)]
        folder = StreamFolder()
        incremental = [e for f in frames if (e := folder.feed(f)) is not None]
        assert incremental == list(fold_stream(frames))


class TestFrameLog:
    def test_line_round_trip(self):
        original = frame(frame_id=42, hands=(hand(0.3, -0.6, pitch=12.5),),
                         tools=2, swipes=(SwipeObs(-0.25, 480.5),))
        assert parse_frame(format_frame(original)) == original

    def test_file_round_trip(self, tmp_path):
        frames = [synth_frame(g, frame_id=i) for i, g in enumerate(GestureEvent)]
        path = tmp_path / "frames.log"
        write_frame_log(path, frames)
        assert read_frame_log(path) == frames


# independent straight-line coding of the threshold rules, literal constants
def _oracle(f: HandFrame):
    for s in f.swipes:
        if s.speed >= 0.0:
            if s.dir_x > 0:
                return GestureEvent.SWIPE_RIGHT
            return GestureEvent.SWIPE_LEFT
    if f.tool_count > 0:
        return GestureEvent.TOOL
    for h in f.hands:
        x = h.arm_dir[0]
        y = h.arm_dir[1]
        if y <= -0.5:
            if x > 0.2:
                return GestureEvent.PICK
            if x < -0.2:
                return GestureEvent.PLACE
    if len(f.hands) > 0:
        if f.hands[0].pitch_deg > 35:
            return GestureEvent.LEAN_BACKWARD
        return GestureEvent.LEAN_FORWARD
    return None


def random_frame(rng: random.Random, frame_id: int) -> HandFrame:
    hands = []
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.25:
            x = rng.choice([0.2, -0.2, 0.21, -0.21, 0.19, -0.19])
            y = rng.choice([-0.5, -0.49, -0.51])
            z = math.sqrt(max(0.0, 1.0 - x * x - y * y))
            direction = (x, y, z)
        else:
            v = [rng.gauss(0, 1) for _ in range(3)]
            norm = math.sqrt(sum(c * c for c in v)) or 1.0
            direction = tuple(c / norm for c in v)
        pitch = rng.choice([35.0, 34.9, 35.1, rng.uniform(-90, 90)])
        hands.append(HandObs(rng.choice(list(HandType)), pitch, direction))
    swipes = tuple(SwipeObs(rng.uniform(-1, 1), rng.uniform(0, 800))
                   for _ in range(rng.randint(0, 1)))
    tools = rng.randint(0, 1) if rng.random() < 0.3 else 0
    return HandFrame(frame_id, frame_id / 300.0, hands=tuple(hands),
                     tool_count=tools, swipes=swipes)


def test_classifier_agrees_with_oracle_on_random_frames():
    rng = random.Random(20240917)
    for i in range(10_000):
        f = random_frame(rng, i)
        assert classify(f) is _oracle(f), f"disagreement on {f}"


_unit = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: sum(x * x for x in v) > 1e-6).map(
    lambda v: tuple(c / math.sqrt(sum(x * x for x in v)) for c in v))


@settings(max_examples=300)
@given(
    direction=_unit,
    pitch=st.floats(-90, 90),
    tools=st.integers(0, 2),
    swipe=st.none() | st.tuples(st.floats(-1, 1), st.floats(0, 800)),
)
def test_classifier_matches_oracle_property(direction, pitch, tools, swipe):
    swipes = (SwipeObs(*swipe),) if swipe else ()
    f = HandFrame(0, 0.0, hands=(HandObs(HandType.LEFT, pitch, direction),),
                  tool_count=tools, swipes=swipes)
    assert classify(f) is _oracle(f)
