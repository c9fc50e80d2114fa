import pytest
from hypothesis import given, settings, strategies as st

from mtlweight.controller import WeightConfig
from mtlweight.errors import InvalidConfig, LengthMismatch, OutOfRange
from mtlweight.metrics import average_accuracy
from mtlweight.simdyn import SimState, SimTask, run_sim, sim_step

CFG = WeightConfig()


def lagging_setup(noise_sd=0.0):
    return [SimTask(rate=0.1, noise_sd=noise_sd) for _ in range(8)] + [SimTask(rate=0.05, noise_sd=noise_sd)]


def test_single_step_example():
    s = sim_step(SimState(0, (0.5,), (1.0,)), [SimTask(1.0, 0.1)], CFG, "uniform")
    assert s.accuracies[0] == pytest.approx(0.55, abs=1e-15)
    assert s.epoch == 1


def test_ceiling_is_fixed_point():
    s = sim_step(SimState(3, (0.8, 0.8), (1.0, 2.0)), [SimTask(0.8, 0.3)] * 2, CFG, "deepchest")
    assert s.accuracies == (0.8, 0.8)


def test_tiny_share_barely_moves():
    s = sim_step(SimState(0, (0.2, 0.2), (1e-12, 1.0)), [SimTask()] * 2, CFG, "uniform")
    assert s.accuracies[0] == pytest.approx(0.2, abs=1e-12)


def test_noise_clipped():
    s = sim_step(SimState(0, (0.1, 0.9), (1.0, 1.0)), [SimTask(0.95)] * 2, CFG, "uniform", [-5.0, 5.0])
    assert s.accuracies == (0.0, 0.95)


def test_errors():
    with pytest.raises(LengthMismatch):
        sim_step(SimState(0, (0.1,), (1.0,)), [SimTask()] * 2, CFG, "uniform")
    with pytest.raises(InvalidConfig):
        run_sim([SimTask()], "uniform", CFG, 0, 0)
    with pytest.raises(OutOfRange):
        SimTask(ceiling=1.5)


def test_trajectory_length_and_determinism():
    tasks = [SimTask(noise_sd=0.02), SimTask(rate=0.05, noise_sd=0.02)]
    assert len(run_sim(tasks, "deepchest", CFG, 1, 0)) == 2
    assert run_sim(tasks, "deepchest", CFG, 30, 7) == run_sim(tasks, "deepchest", CFG, 30, 7)
    assert run_sim(tasks, "deepchest", CFG, 30, 7) != run_sim(tasks, "deepchest", CFG, 30, 8)


def test_symmetric_noiseless_tasks_stay_identical():
    for state in run_sim([SimTask()] * 4, "deepchest", CFG, 50, 0):
        assert len(set(state.accuracies)) == 1 and len(set(state.weights)) == 1


def test_uniform_weights_never_change():
    assert all(s.weights == (1.0,) * 9 for s in run_sim(lagging_setup(0.01), "uniform", CFG, 40, 1))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 0.1), st.integers(1, 5))
def test_trajectory_bounded(seed, sd, T):
    tasks = [SimTask(0.9, 0.2, sd)] * T
    for s in run_sim(tasks, "deepchest", CFG, 25, seed):
        assert all(0.0 <= a <= 0.9 for a in s.accuracies)
        assert all(0.0 < w <= CFG.w_max for w in s.weights)


def test_lagging_task_takes_the_lead():
    traj = run_sim(lagging_setup(), "deepchest", CFG, 200, 0)
    lead = next(s.epoch for s in traj if s.weights[-1] > max(s.weights[:-1]))
    assert lead <= 10
    for s in traj[lead:]:
        if s.accuracies[-1] >= average_accuracy(s.accuracies):
            break
        assert s.weights[-1] > max(s.weights[:-1])
