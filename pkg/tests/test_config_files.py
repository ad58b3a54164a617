import json

import numpy as np
import pytest

from breakthrough_timing.config import ConfigError, load_config, parse_config
from breakthrough_timing.files import read_boundary, read_csv, write_boundary, write_csv

BASE = {
    "model": {"model": "gbm", "mu": 0.0, "sigma": 0.1 ** 0.5, "r": 0.05},
    "payoffs": {"I": 1.0, "kappa": 2.0},
    "costs": {"family": "exponential", "rate": 1.0},
}


def _with(section, **kw):
    doc = json.loads(json.dumps(BASE))
    doc[section].update(kw)
    return doc


def test_reference_config_builds_problem(problem):
    cfg = parse_config(BASE, "ref")
    pr = cfg.problem()
    assert pr.x_R == pytest.approx(problem.x_R, rel=1e-14)
    assert cfg.solver_settings().rtol == 1e-10


@pytest.mark.parametrize("doc,needle", [
    (_with("model", mu=0.06), "mu < r"),
    (_with("payoffs", kappa=1.0), "kappa"),
    (_with("costs", rat=1.0), "rat"),
    (_with("model", model="ou"), "gbm"),
    (_with("payoffs", kappa="two"), "number"),
    ({**BASE, "extra": {}}, "extra"),
    ({k: v for k, v in BASE.items() if k != "costs"}, "family"),
    (_with("costs", family="gamma"), "family"),
    ({**BASE, "solver": {"speed": 1}}, "speed"),
])
def test_config_errors(doc, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(doc).problem()


def test_json_syntax_error_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "model": {\n')
    with pytest.raises(ConfigError, match=r"bad.json:3"):
        load_config(p)


def test_csv_round_trip(tmp_path):
    vals = [(0.1, 1 / 3, "Stop", 7), (np.float64(2.0) / 3, 1e-300, "", True)]
    path = write_csv(tmp_path / "t.csv", ["a", "b", "c", "d"], vals, {"k": 0.1})
    lines = path.read_text().splitlines()
    assert lines[0] == "# artifact 0.1.0"
    assert lines[2] == "a,b,c,d"
    meta, header, rows = read_csv(path)
    assert meta == {"k": "0.10000000000000001"}
    assert rows[0][1] == 1 / 3 and rows[1][0] == 2 / 3


def test_boundary_file_round_trip(tmp_path, problem, boundary):
    path = write_boundary(tmp_path / "boundary.csv", problem, boundary)
    back = read_boundary(path, problem.x_R)
    assert back.m_low == boundary.m_low
    np.testing.assert_array_equal(back.b, boundary.b)
    assert back.bracket == boundary.bracket
    _, header, rows = read_csv(path)
    assert header == ["m", "b", "E", "m_x"]
    assert all(r[3] > r[1] for r in rows)
