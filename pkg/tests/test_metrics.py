import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtlweight.errors import EmptyInput, EmptyTasks, LengthMismatch, NonFinite, ZeroBaseline
from mtlweight.metrics import (DeltaMReport, average_accuracy, binary_accuracy, delta_m_per_task,
                               delta_m_total, format_2dp)


def test_binary_accuracy_examples():
    assert binary_accuracy([0.9, 0.2], [1, 0]) == 1.0
    assert binary_accuracy([0.9, 0.2], [0, 0]) == 0.5
    assert binary_accuracy([0.5], [1], 0.5) == 1.0


def test_binary_accuracy_errors():
    with pytest.raises(EmptyInput):
        binary_accuracy([], [])
    with pytest.raises(LengthMismatch):
        binary_accuracy([0.1, 0.2], [1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30), st.data())
def test_binary_accuracy_monotone_rescaling(probs, data):
    labels = data.draw(st.lists(st.integers(0, 1), min_size=len(probs), max_size=len(probs)))
    p = np.array(probs)
    # squares and square roots keep each sample on its side of 0.25 / 0.5 respectively
    assert binary_accuracy(p, labels, 0.5) == binary_accuracy(p ** 2, labels, 0.25)


def test_average_accuracy_examples():
    assert average_accuracy([0.5, 0.9]) == pytest.approx(0.7)
    assert average_accuracy([0.7]) == 0.7
    assert average_accuracy([0.0, 1.0, 0.5]) == 0.5
    with pytest.raises(EmptyTasks):
        average_accuracy([])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12), st.randoms(use_true_random=False))
def test_average_accuracy_properties(acc, rnd):
    m = average_accuracy(acc)
    assert min(acc) <= m <= max(acc)
    shuffled = list(acc)
    rnd.shuffle(shuffled)
    assert average_accuracy(shuffled) == m


def test_delta_m_examples():
    assert delta_m_per_task(0.34, 0.91) == pytest.approx(-0.626373626, abs=1e-9)
    # (0.11 - 0.39) / 0.39 = -0.717948..., which rounds to -0.72
    assert delta_m_per_task(0.11, 0.39) == pytest.approx(-0.717948718, abs=1e-9)
    assert delta_m_per_task(0.4, 0.4) == 0.0


def test_delta_m_errors():
    with pytest.raises(ZeroBaseline):
        delta_m_per_task(0.1, 0.0)
    with pytest.raises(NonFinite):
        delta_m_per_task(math.nan, 0.3)
    with pytest.raises(EmptyTasks):
        delta_m_total([])


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(1e-6, 10.0))
def test_delta_m_sign(mtl, stl):
    d = delta_m_per_task(mtl, stl)
    assert (d > 0) == (mtl > stl) and (d < 0) == (mtl < stl)


def test_delta_m_total_examples():
    assert delta_m_total([-0.3]) == -0.3
    assert delta_m_total([-0.5, 0.5]) == 0.0


def test_report_from_losses():
    rep = DeltaMReport.from_losses(["a", "b"], [0.5, 0.4], [0.25, 0.4])
    assert [r.delta_m for r in rep.per_task] == [-0.5, 0.0]
    assert rep.total == -0.25


def test_format_2dp_has_no_negative_zero():
    assert format_2dp(-0.001) == "0.00"
    assert format_2dp(-0.626) == "-0.63"
