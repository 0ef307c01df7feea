import pytest

from pws.cli import fixture_path
from pws.compose import build_holarchy, extract_interface
from pws.dsl import format_interface, load_model, parse_model


def load_fixture(*names):
    return load_model([fixture_path(n) for n in names])


@pytest.fixture
def crossroad_model():
    return load_fixture("crossroad.pws")


@pytest.fixture
def crossroad(crossroad_model):
    return crossroad_model.system("Crossroad")


@pytest.fixture
def crossroad_bindings(crossroad_model, crossroad):
    return crossroad_model.bindings_for(crossroad)


@pytest.fixture
def traffic_light(crossroad_model):
    return crossroad_model.interface("TrafficLight")


@pytest.fixture
def atc_model():
    return load_fixture("atc.pws")


@pytest.fixture
def atc_holarchy(atc_model):
    return build_holarchy(atc_model, "Airport")


@pytest.fixture
def junction_model(crossroad_model):
    """Crossroad model + its extracted interface + the Junction parent."""
    extracted = parse_model(format_interface(extract_interface(crossroad_model.system("Crossroad"))))
    junction = parse_model(fixture_path("junction.pws").read_text(), validate=False)
    return crossroad_model.merge(extracted, junction)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
