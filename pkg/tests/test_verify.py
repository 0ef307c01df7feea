from dataclasses import replace

import pytest

from pws.cli import fixture_path
from pws.compose import build_holarchy
from pws.dsl import parse_model, parse_properties
from pws.model import Internal, Pattern
from pws.semantics import compute_semantics
from pws.verify import (
    VerificationCache,
    check_init,
    check_leaves,
    check_never,
    check_wellformed,
    verify,
    verify_holarchy,
)


@pytest.fixture
def sem(crossroad, crossroad_bindings):
    return compute_semantics(crossroad, crossroad_bindings)


def crossroad_variant(*extra_lines):
    text = fixture_path("crossroad.pws").read_text()
    text = text.replace("    t4: W2", "\n".join(extra_lines) + "\n    t4: W2")
    model = parse_model(text)
    system = model.system("Crossroad")
    return system, model.bindings_for(system)


def test_init_holds(sem):
    assert check_init(sem, "Main", {("G", "R")}).holds


def test_init_fails_with_witness(sem):
    v = check_init(sem, "Main", {("R", "G")})
    assert not v.holds
    assert v.witness == {"state": "Main", "configuration": ["G", "R"]}


def test_init_universal_pattern(sem, traffic_light):
    everything = {(a, b) for a in traffic_light.states for b in traffic_light.states}
    assert check_init(sem, "Main", everything).holds
    assert check_init(sem, "Main", Pattern.of({})).holds


def test_never_holds_on_green_green(sem):
    assert check_never(sem, {("G", "G")}).holds
    assert check_never(sem, Pattern.of({"main": "G", "farm": "G"})).holds


def test_never_fails_with_witness(sem):
    v = check_never(sem, {("Y", "R")})
    assert not v.holds
    assert v.witness == {"state": "W1", "configuration": ["Y", "R"]}


def test_never_empty_pattern_holds(sem):
    assert check_never(sem, set()).holds


def test_leaves_holds(crossroad, sem):
    assert check_leaves(crossroad, sem, "farm", "G").holds
    assert check_leaves(crossroad, sem, "main", "G").holds


def test_leaves_self_loop_is_a_cycle():
    system, bindings = crossroad_variant("    t5: Farm -> Farm internal tick")
    sem = compute_semantics(system, bindings)
    v = check_leaves(system, sem, "farm", "G")
    assert not v.holds
    assert v.witness == {"cycle": ["Farm"]}


def test_leaves_dead_end_is_trapped():
    text = fixture_path("crossroad.pws").read_text().replace("    t3: Farm -> W2 internal tout do farm.stop notify farmClosing\n", "")
    model = parse_model(text)
    system = model.system("Crossroad")
    sem = compute_semantics(system, model.bindings_for(system))
    v = check_leaves(system, sem, "farm", "G")
    assert v.witness == {"trapped": "Farm"}


def test_leaves_vacuous(crossroad, sem):
    # no whole state admits farm=Q, so the region is empty
    assert check_leaves(crossroad, sem, "farm", "Q").holds
    with pytest.raises(KeyError):
        check_leaves(crossroad, sem, "nope", "G")


def test_wellformed_clean(crossroad, sem):
    assert check_wellformed(crossroad, sem) == []


def test_wellformed_reports_disabled_command():
    system, bindings = crossroad_variant("    t5: Main -> Main internal poke do main.go")
    sem = compute_semantics(system, bindings)
    findings = check_wellformed(system, sem)
    assert [(f.severity, f.kind) for f in findings] == [("error", "command-not-enabled")]
    assert "go" in findings[0].message
    assert sem["Main"] == {("G", "R")}


def test_wellformed_warns_on_unreachable():
    text = fixture_path("crossroad.pws").read_text().replace("states Main W1 Farm W2", "states Main W1 Farm W2 Lost")
    model = parse_model(text)
    system = model.system("Crossroad")
    findings = check_wellformed(system, compute_semantics(system, model.bindings_for(system)))
    assert [(f.severity, f.message) for f in findings] == [("warning", "unreachable whole state Lost")]


def test_verify_crossroad_properties(crossroad, crossroad_bindings):
    props = parse_properties(fixture_path("crossroad.props").read_text(), "crossroad.props", crossroad, crossroad_bindings)
    report = verify(crossroad, crossroad_bindings, props)
    assert report.ok
    assert [v.name for v in report.verdicts] == [
        "INIT (main=G, farm=R)", "NEVER (main=G, farm=G)", "LEAVES main.G", "LEAVES farm.G",
    ]


def test_verify_reports_failure_with_witness(crossroad, crossroad_bindings):
    props = parse_properties("NEVER (main=G, farm=R)", system=crossroad, bindings=crossroad_bindings)
    report = verify(crossroad, crossroad_bindings, props)
    assert len(report.failures()) == 1
    assert report.failures()[0].witness == {"state": "Main", "configuration": ["G", "R"]}
    assert "FAILS" in report.render()


def test_verify_without_properties(crossroad, crossroad_bindings):
    report = verify(crossroad, crossroad_bindings)
    assert report.verdicts == []
    assert report.stats["configurations"] == 4
    assert report.stats["arity"] == 2
    assert report.stats["iterations"] <= report.stats["iteration_bound"]


def test_holarchy_parent_arity_is_slot_count(junction_model):
    h = build_holarchy(junction_model, "JunctionRun")
    props = parse_properties(fixture_path("junction.props").read_text(), "junction.props",
                             h.root, h.bindings_for(h.root))
    reports = verify_holarchy(h, {".": props})
    assert set(reports) == {".", "cross"}
    root = reports["."]
    assert root.ok, root.render()
    assert root.stats["arity"] == 3
    assert all(len(c) == 3 for configs in root.semantics.entries.values() for c in configs)
    assert reports["cross"].stats["arity"] == 2


def test_single_holon_matches_verify(crossroad_model, crossroad, crossroad_bindings):
    props = parse_properties(fixture_path("crossroad.props").read_text(), system=crossroad, bindings=crossroad_bindings)
    h = build_holarchy(crossroad_model, root="Crossroad")
    report = verify_holarchy(h, {".": props})["."]
    direct = verify(crossroad, crossroad_bindings, props)
    assert report.to_json() == direct.to_json()


def test_cache_reuses_reports_for_shape_preserving_edits(junction_model, traffic_light):
    cache = VerificationCache()
    verify_holarchy(build_holarchy(junction_model, "JunctionRun"), cache=cache)
    assert (cache.hits, cache.misses) == (0, 2)

    renamed = replace(traffic_light, transitions=tuple(
        replace(t, id="x_" + t.id, trigger=Internal("z" + t.trigger.event)) if isinstance(t.trigger, Internal)
        else t for t in traffic_light.transitions
    ))
    h = build_holarchy(junction_model, "JunctionRun")
    h.bind(("cross", "farm"), renamed)
    verify_holarchy(h, cache=cache)
    assert (cache.hits, cache.misses) == (2, 2)

    # different properties change the key of the holon that owns them
    props = parse_properties("NEVER (gate=Down, bell=Off)", system=h.root, bindings=h.bindings_for(h.root))
    verify_holarchy(h, {".": props}, cache=cache)
    assert (cache.hits, cache.misses) == (3, 3)
