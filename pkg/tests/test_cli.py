import json
import shutil
import subprocess
import sys

import pytest

from pws.cli import fixture_path, main
from pws.dsl import parse_model


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_crossroad(capsys):
    code, out, _ = cli(capsys, "check", "@crossroad.pws", "@crossroad.props")
    assert code == 0
    assert out.count(": holds") == 4
    assert "well-formedness: clean" in out


def test_check_failing_property(tmp_path, capsys):
    props = tmp_path / "bad.props"
    props.write_text(fixture_path("crossroad.props").read_text() + "NEVER (main=G, farm=R)\n")
    code, out, _ = cli(capsys, "check", "@crossroad.pws", str(props))
    assert code == 1
    assert "NEVER (main=G, farm=R): FAILS (reachable in Main as (G,R))" in out


def test_check_missing_file(capsys):
    code, _, err = cli(capsys, "check", "no/such/file.pws")
    assert code == 2
    assert "cannot read" in err


def test_check_syntax_error(tmp_path, capsys):
    bad = tmp_path / "bad.pws"
    bad.write_text("interface X {\n  states A\n  initial B\n")
    code, _, err = cli(capsys, "check", str(bad))
    assert code == 2
    assert "bad.pws:" in err


def test_check_json(capsys):
    code, out, _ = cli(capsys, "check", "@crossroad.pws", "@crossroad.props", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert [p["verdict"] for p in payload["properties"]] == ["holds"] * 4


def test_check_holarchy(tmp_path, capsys):
    code, out, _ = cli(capsys, "extract", "@crossroad.pws")
    extracted = tmp_path / "crossroad_iface.pws"
    extracted.write_text(out)
    code, out, err = cli(capsys, "check", "@crossroad.pws", str(extracted), "@junction.pws",
                         "@junction.props", "--holarchy", "JunctionRun")
    assert code == 0, out + err
    assert "[.] system Junction" in out and "[cross] system Crossroad" in out


def test_sem_text(capsys):
    code, out, _ = cli(capsys, "sem", "@crossroad.pws")
    assert code == 0
    assert out == "Main: {(G,R)}\nW1: {(Y,R)}\nFarm: {(R,G)}\nW2: {(R,Y)}\n"


def test_sem_json_and_oracle(capsys):
    code, out, _ = cli(capsys, "sem", "@crossroad.pws", "--format", "json", "--oracle")
    assert code == 0
    data = json.loads(out)
    assert data["slots"] == ["main", "farm"]
    assert data["semantics"] == {"Main": [["G", "R"]], "W1": [["Y", "R"]], "Farm": [["R", "G"]], "W2": [["R", "Y"]]}


def test_sem_unreachable_warns(tmp_path, capsys):
    text = fixture_path("crossroad.pws").read_text().replace("states Main W1 Farm W2", "states Main W1 Farm W2 S")
    f = tmp_path / "c.pws"
    f.write_text(text)
    code, out, err = cli(capsys, "sem", str(f))
    assert code == 0
    assert "S: {}" in out.splitlines()
    assert "warning: unreachable whole state S" in err


def test_sem_unknown_system(capsys):
    code, _, err = cli(capsys, "sem", "@crossroad.pws", "--system", "Nope")
    assert code == 2
    assert "unknown system Nope" in err


def test_extract_reparses(tmp_path, capsys):
    code, out, _ = cli(capsys, "extract", "@crossroad.pws")
    assert code == 0
    iface = parse_model(out).interface("Crossroad")
    assert iface.states == ("Main", "W1", "Farm", "W2")
    target = tmp_path / "out.pws"
    assert cli(capsys, "extract", "@crossroad.pws", "--out", str(target))[0] == 0
    assert target.read_text() == out


def test_extract_ambiguity(tmp_path, capsys):
    f = tmp_path / "amb.pws"
    f.write_text("system S {\n whole {\n  initial A; states A B\n  x: A -> B on go\n  y: A -> A on go\n }\n}\n")
    code, _, err = cli(capsys, "extract", str(f))
    assert code == 2
    assert "x" in err and "y" in err


def test_sim_atc(capsys):
    code, out, _ = cli(capsys, "sim", "@atc.pws", "@atc.script")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 6
    assert [l.split("\t")[1] for l in lines] == [
        "NotificationUp", "CommandDown", "NotificationUp", "CommandDown", "NotificationUp", "CommandDown"]


def test_sim_empty_script(tmp_path, capsys):
    s = tmp_path / "empty.script"
    s.write_text("# nothing\n")
    code, out, _ = cli(capsys, "sim", "@atc.pws", str(s))
    assert (code, out) == (0, "")


def test_sim_ambiguous(tmp_path, capsys):
    f = tmp_path / "twice.pws"
    f.write_text(fixture_path("crossroad.pws").read_text().split("system Crossroad")[0] + """
system Twice {
  parts { farm: TrafficLight }
  whole {
    initial A
    states A B C
    x: A -> B on farm.car
    y: A -> C on farm.car
  }
}
""")
    s = tmp_path / "go.script"
    s.write_text("farm car\n")
    code, out, err = cli(capsys, "sim", str(f), str(s))
    assert code == 1
    assert "x" in err and "y" in err


def test_sim_assert_sem_crossroad(tmp_path, capsys):
    s = tmp_path / "cycle.script"
    s.write_text("farm car\nmain tout\n. tout\nfarm tout\n")
    code, out, _ = cli(capsys, "sim", "@crossroad.pws", str(s), "--assert-sem")
    assert code == 0
    assert out.splitlines()[-1].endswith("mainOpen")


def test_dot_system(capsys):
    code, out, _ = cli(capsys, "dot", "@crossroad.pws")
    assert code == 0
    assert out.startswith('digraph "Crossroad"')
    assert out.count("shape=") == 4
    assert out.count(" -> ") == 4


def test_dot_sem_and_interface(capsys):
    _, out, _ = cli(capsys, "dot", "@crossroad.pws", "--sem")
    assert "{(G,R)}" in out
    code, out, _ = cli(capsys, "dot", "@crossroad.pws", "-t", "TrafficLight")
    assert code == 0
    assert out.count(" -> ") == 4
    assert cli(capsys, "dot", "@crossroad.pws", "-t", "Nope")[0] == 2


def test_output_is_deterministic(capsys):
    runs = [cli(capsys, "check", "@atc.pws", "@atc.props", "-s", "ATC", "--format", "json")[1] for _ in range(3)]
    assert len(set(runs)) == 1


@pytest.mark.skipif(shutil.which("pws") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["pws", "sem", "@crossroad.pws"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("Main: {(G,R)}")


def test_module_entry():
    proc = subprocess.run([sys.executable, "-m", "pws", "sem", "@crossroad.pws"], capture_output=True, text=True)
    assert proc.returncode == 0
