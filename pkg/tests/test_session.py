"""Editing-session state machine.

The triangle walk is the reference flow: select {d2, d3} with d1 = 10,
see both ranges unbounded, assign d2 := 20, see d3 contract to [10, 30],
assign inside, finalize to a witness with negligible residual.
"""
from __future__ import annotations

import numpy as np
import pytest

from prange.errors import (EmptyHistory, OutOfRange, SelectionError,
                           StaleRanges, UnknownParameter)
from prange.ranges import ParameterRange
from prange.session import EditingSession, select
from prange.settings import SolverSettings


def small_settings(**kw) -> SolverSettings:
    base = dict(particles=300, iterations=120, seed=0)
    base.update(kw)
    return SolverSettings(**base)


def reports(ranges: dict) -> dict:
    return {k: [iv.to_report() for iv in v.intervals] for k, v in ranges.items()}


UNBOUNDED = [{"lo": 0.0, "loClosed": True, "hi": None, "hiClosed": False}]


class TestSelect:
    def test_selection_partitions_parameters(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings(), eager=False)
        assert s.variable_params == ["d2", "d3"]
        assert s.fixed_params == {"d1": 10.0}
        assert s.unassigned == ["d2", "d3"]
        assert s.assigned == {} and s.stale

    def test_empty_selection_rejected(self, triangle):
        with pytest.raises(SelectionError):
            select(triangle, [], small_settings())

    def test_unknown_parameter_rejected(self, triangle):
        with pytest.raises(UnknownParameter):
            select(triangle, ["d2", "nope"], small_settings())

    def test_duplicate_selection_rejected(self, triangle):
        with pytest.raises(SelectionError):
            select(triangle, ["d2", "d2"], small_settings())

    def test_select_all_parameters(self, hexagon):
        names = [p.name for p in hexagon.parameters]
        s = select(hexagon, names, small_settings(), eager=False)
        assert len(s.variable_params) == len(names)
        assert s.fixed_params == {}


class TestRanges:
    def test_first_stage_is_unbounded(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings(), eager=False)
        r = s.ranges()
        assert reports(r) == {"d2": UNBOUNDED, "d3": UNBOUNDED}
        assert not s.stale

    def test_ranges_precondition_needs_unassigned(self, triangle):
        s = select(triangle, ["d2"], small_settings(), eager=False)
        s.ranges()
        s.assign("d2", 15.0)
        with pytest.raises(SelectionError):
            s.ranges()


class TestAssign:
    def test_full_walk_contracts_and_finalizes(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings())
        s.ranges()
        s.assign("d2", 20.0)
        assert reports(s.last_ranges)["d3"] == [
            {"lo": pytest.approx(10.0, abs=1e-3), "loClosed": True,
             "hi": pytest.approx(30.0, abs=1e-3), "hiClosed": True}]
        s.assign("d3", 20.0)
        slots, residual = s.finalize()
        assert residual < 1e-10
        p1 = np.array([slots["P1.x"], slots["P1.y"]])
        p2 = np.array([slots["P2.x"], slots["P2.y"]])
        p3 = np.array([slots["P3.x"], slots["P3.y"]])
        assert np.hypot(*(p1 - p2)) == pytest.approx(10.0, abs=1e-6)
        assert np.hypot(*(p2 - p3)) == pytest.approx(20.0, abs=1e-6)
        assert np.hypot(*(p1 - p3)) == pytest.approx(20.0, abs=1e-6)

    def test_out_of_range_value_rejected_with_intervals(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings())
        s.ranges()
        s.assign("d2", 20.0)
        with pytest.raises(OutOfRange) as err:
            s.assign("d3", 5.0)
        assert err.value.parameter == "d3"
        assert err.value.value == 5.0
        assert err.value.intervals[0]["lo"] == pytest.approx(10.0, abs=1e-3)
        assert "d3" not in s.assigned

    def test_assign_before_ranges_is_stale(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings(), eager=False)
        with pytest.raises(StaleRanges):
            s.assign("d2", 20.0)

    def test_assign_nonselected_parameter_rejected(self, triangle):
        s = select(triangle, ["d2"], small_settings(), eager=False)
        s.ranges()
        with pytest.raises(SelectionError):
            s.assign("d1", 12.0)

    def test_assign_twice_rejected(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings())
        s.ranges()
        s.assign("d2", 20.0)
        with pytest.raises(SelectionError):
            s.assign("d2", 25.0)

    def test_finalize_with_unassigned_rejected(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings(), eager=False)
        with pytest.raises(SelectionError):
            s.finalize()


class TestUndo:
    def test_undo_restores_previous_ranges(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings())
        before = reports(s.ranges())
        s.assign("d2", 20.0)
        s.undo()
        assert s.assigned == {}
        assert reports(s.last_ranges) == before

    def test_undo_then_reassign_different_value(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings())
        s.ranges()
        s.assign("d2", 20.0)
        s.undo()
        s.assign("d2", 14.0)
        assert s.assigned == {"d2": 14.0}

    def test_undo_on_fresh_session_rejected(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings(), eager=False)
        with pytest.raises(EmptyHistory):
            s.undo()


class TestDeterminism:
    def test_same_seed_same_ranges(self, triangle):
        runs = []
        for _ in range(2):
            s = select(triangle, ["d2", "d3"], small_settings(seed=42))
            s.ranges()
            s.assign("d2", 20.0)
            runs.append(reports(s.last_ranges))
        assert runs[0] == runs[1]

    def test_each_parameter_gets_its_own_seed(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings(), eager=False)
        r = s.ranges()
        assert r["d2"].seed != r["d3"].seed


class TestSaveResume:
    def test_round_trip_preserves_state_and_flow(self, triangle):
        s = select(triangle, ["d2", "d3"], small_settings())
        s.ranges()
        s.assign("d2", 20.0)
        contracted = reports(s.last_ranges)
        text = s.save()

        resumed = EditingSession.resume(text)
        assert resumed.assigned == {"d2": 20.0}
        assert resumed.fixed_params == {"d1": 10.0}
        assert resumed.stale
        assert reports({k: v for k, v in resumed.ranges().items()
                        if isinstance(v, ParameterRange)}) == contracted
        resumed.assign("d3", 20.0)
        _, residual = resumed.finalize()
        assert residual < 1e-10
