import pytest

from pws.compose import Holarchy, build_holarchy
from pws.dsl import parse_model
from pws.errors import AmbiguousFiring, SimulationError
from pws.sim import Direction, init_runtime, inject, parse_script, run, step

ATC_TRACE = [
    (Direction.NOTIFICATION_UP, ("plane1", "engine2"), "overheat"),
    (Direction.COMMAND_DOWN, ("plane1", "engine2"), "reducePower"),
    (Direction.NOTIFICATION_UP, ("plane1",), "engineProblem"),
    (Direction.COMMAND_DOWN, ("plane2",), "abortLanding"),
    (Direction.NOTIFICATION_UP, ("plane2",), "landingAborted"),
    (Direction.COMMAND_DOWN, ("plane1",), "emergencyLanding"),
]


@pytest.fixture
def crossroad_run(crossroad_model):
    return build_holarchy(crossroad_model, root="Crossroad")


def test_init_crossroad(crossroad_run):
    rt = init_runtime(crossroad_run)
    assert rt.state[()] == "Main"
    assert rt.state[("main",)] == "G"
    assert rt.state[("farm",)] == "R"
    assert rt.configuration() == ("G", "R")


def test_init_single_interface(traffic_light):
    model = parse_model("system Solo {\n parts { light: TrafficLight }\n whole { initial S; states S }\n}", validate=False)
    h = Holarchy(model.system("Solo"), model.merge(parse_model(
        "interface TrafficLight { initial R; states R G Y; t_go: R -> G on go }")))
    rt = init_runtime(h)
    assert rt.configuration() == ("R",)


def test_init_atc(atc_holarchy):
    rt = init_runtime(atc_holarchy)
    assert rt.state[()] == "Normal"
    assert rt.state[("plane1",)] == rt.state[("plane2",)] == "Approach"
    assert rt.configuration(("plane1",)) == ("Normal", "Normal")
    assert rt.trace == []


def test_inject_queues(atc_holarchy):
    rt = inject(init_runtime(atc_holarchy), "plane1/engine2", "overheat")
    assert len(rt.queue) == 1
    assert rt.trace == []


def test_inject_rejects_unknown(atc_holarchy):
    rt = init_runtime(atc_holarchy)
    with pytest.raises(SimulationError):
        rt.inject("plane1/engine2", "reducePower")
    with pytest.raises(SimulationError):
        rt.inject("plane9", "overheat")


def test_atc_trace(atc_holarchy):
    trace = run(init_runtime(atc_holarchy), [("plane1/engine2", "overheat")])
    assert [(e.direction, e.path, e.event) for e in trace] == ATC_TRACE
    assert [e.seq for e in trace] == [1, 2, 3, 4, 5, 6]


def test_atc_final_state(atc_holarchy):
    rt = init_runtime(atc_holarchy, assert_sem=True)
    rt.run([("plane1/engine2", "overheat")])
    assert rt.state[()] == "Emergency"
    assert rt.state[("plane1",)] == "Emergency"
    assert rt.state[("plane2",)] == "Holding"
    assert rt.state[("plane1", "engine2")] == "Reduced"
    assert rt.state[("plane1", "engine1")] == "Normal"


def test_fifo_order(atc_holarchy):
    rt = init_runtime(atc_holarchy)
    rt.inject("plane1/engine1", "overheat").inject("plane1/engine2", "overheat")
    step(rt)
    assert rt.trace[0].path == ("plane1", "engine1")
    rt.settle()
    # both leaf notifications are queued before plane1 reacts to the first;
    # by the time engine2's arrives plane1 has left Approach and ignores it
    assert [(e.path, e.event) for e in rt.trace] == [
        (("plane1", "engine1"), "overheat"),
        (("plane1", "engine2"), "overheat"),
        (("plane1", "engine1"), "reducePower"),
        (("plane1",), "engineProblem"),
        (("plane2",), "abortLanding"),
        (("plane2",), "landingAborted"),
        (("plane1",), "emergencyLanding"),
    ]


def test_crossroad_cycle(crossroad_run):
    rt = init_runtime(crossroad_run, assert_sem=True)
    seen = [rt.state[()]]
    for path, event in [("farm", "car"), ("main", "tout"), (".", "tout"), ("farm", "tout")]:
        rt.inject(path, event).settle()
        seen.append(rt.state[()])
    assert seen == ["Main", "W1", "Farm", "W2", "Main"]
    assert rt.configuration() == ("G", "R")


def test_step_empty_queue(crossroad_run):
    with pytest.raises(SimulationError):
        init_runtime(crossroad_run).step()


def test_ambiguous_firing(traffic_light, crossroad_model):
    model = crossroad_model.merge(parse_model("""
system Twice {
  parts { farm: TrafficLight }
  whole {
    initial A
    states A B C
    x: A -> B on farm.car
    y: A -> C on farm.car
  }
}""", validate=False))
    rt = init_runtime(build_holarchy(model, root="Twice"))
    rt.inject("farm", "car")
    with pytest.raises(AmbiguousFiring) as exc:
        rt.settle()
    assert tuple(exc.value.candidates) == ("x", "y")


def test_replay_is_deterministic(atc_holarchy):
    script = [("plane1/engine2", "overheat"), ("plane1", "touchdown"), ("plane2/engine1", "overheat")]
    a = run(init_runtime(atc_holarchy), script)
    b = run(init_runtime(atc_holarchy), script)
    assert a.text() == b.text()
    assert a.dumps() == b.dumps()


def test_empty_script(atc_holarchy):
    assert run(init_runtime(atc_holarchy), []) == []


def test_effects_are_local(atc_holarchy):
    """A command to one plane leaves the other plane's subtree alone."""
    rt = init_runtime(atc_holarchy)
    rt.run([("plane2/engine1", "overheat")])
    # plane2's problem is not handled by the tower (only plane1's is)
    assert rt.state[()] == "Normal"
    assert rt.state[("plane2",)] == "Degraded"
    assert rt.state[("plane1",)] == "Approach"
    assert all(e.path[0] == "plane2" for e in rt.trace)


def test_trace_injections_flag(atc_holarchy):
    rt = init_runtime(atc_holarchy, trace_injections=True)
    rt.run([("plane1/engine2", "overheat")])
    assert rt.trace[0].direction == Direction.INTERNAL_FIRED
    assert len(rt.trace) == 7


def test_parse_script():
    assert parse_script("# c\nplane1/engine2 overheat\n\n. tout  # root\n") == [
        ("plane1/engine2", "overheat"), (".", "tout")]
    with pytest.raises(SimulationError):
        parse_script("just-one-token")


def test_trace_text_format(atc_holarchy):
    text = run(init_runtime(atc_holarchy), [("plane1/engine2", "overheat")]).text()
    assert text.splitlines()[0] == "1\tNotificationUp\tplane1/engine2\toverheat"
