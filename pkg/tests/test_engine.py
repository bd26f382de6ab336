import pytest

from tsnlab.sim import Engine


def test_events_fire_in_time_order():
    eng = Engine()
    seen = []
    eng.schedule(30, lambda t, a: seen.append(t))
    eng.schedule(10, lambda t, a: seen.append(t))
    eng.schedule(20, lambda t, a: seen.append(t))
    eng.run()
    assert seen == [10, 20, 30]
    assert eng.now == 30


def test_ties_fire_in_scheduling_order():
    eng = Engine()
    seen = []
    for label in "abc":
        eng.schedule(5, lambda t, a, lab=label: seen.append(lab))
    eng.run()
    assert seen == ["a", "b", "c"]


def test_scheduling_in_the_past_raises():
    eng = Engine()
    eng.schedule(10, lambda t, a: None)
    eng.run()
    with pytest.raises(ValueError):
        eng.schedule(9, lambda t, a: None)


def test_handler_may_schedule_at_current_instant():
    eng = Engine()
    seen = []

    def first(t, a):
        eng.schedule(t, lambda t2, a2: seen.append(t2))

    eng.schedule(7, first)
    eng.run()
    assert seen == [7]


def test_run_until_leaves_future_events_pending():
    eng = Engine()
    seen = []
    eng.schedule(10, lambda t, a: seen.append(t))
    eng.schedule(100, lambda t, a: seen.append(t))
    eng.run(until=50)
    assert seen == [10]
    assert eng.now == 50
    assert len(eng) == 1
    eng.run()
    assert seen == [10, 100]


def test_event_argument_is_passed_through():
    eng = Engine()
    got = []
    eng.schedule(1, lambda t, a: got.append(a), arg="payload")
    eng.run()
    assert got == ["payload"]


def test_stop_halts_processing():
    eng = Engine()
    seen = []

    def stopper(t, a):
        seen.append(t)
        eng.stop()

    eng.schedule(1, stopper)
    eng.schedule(2, lambda t, a: seen.append(t))
    eng.run()
    assert seen == [1]
    assert len(eng) == 1


def test_self_rescheduling_chain():
    eng = Engine()
    ticks = []

    def tick(t, a):
        ticks.append(t)
        if a < 4:
            eng.schedule(t + 10, tick, a + 1)

    eng.schedule(0, tick, 0)
    eng.run()
    assert ticks == [0, 10, 20, 30, 40]
