import math

import pytest

from breakthrough_timing.diffusion import DomainError
from breakthrough_timing.integrate import dormand_prince


def test_exponential_growth():
    res = dormand_prince(lambda t, y: y, 0.0, 1.0, 2.0, rtol=1e-11, atol=1e-13)
    assert res.status == "done"
    assert res.ts[-1] == pytest.approx(2.0)
    assert res.ys[-1] == pytest.approx(math.exp(2.0), rel=1e-9)


def test_event_stops_the_run():
    res = dormand_prince(lambda t, y: 1.0, 0.0, 0.0, 10.0, max_step=lambda t, y, dy: 0.1,
                         event=lambda t, y, dy: "crossed" if y > 3.0 else None)
    assert res.status == "event" and res.event == "crossed"
    assert 3.0 < res.ys[-1] <= 3.1 + 1e-12


def test_domain_error_near_singularity_underflows():
    # y' = 1 / (1 - y) reaches the singularity y = 1 at t = 0.5
    def f(t, y):
        if y >= 1.0:
            raise DomainError("past the singularity")
        return 1.0 / (1.0 - y)

    res = dormand_prince(f, 0.0, 0.0, 1.0)
    assert res.status == "underflow"
    assert res.ts[-1] == pytest.approx(0.5, abs=1e-4)
    assert res.n_rejected > 0


def test_nonfinite_right_hand_side():
    res = dormand_prince(lambda t, y: math.nan, 0.0, 0.0, 1.0)
    assert res.status == "nonfinite"


def test_step_cap_gives_dense_output():
    res = dormand_prince(lambda t, y: math.cos(t), 0.0, 0.0, 3.0, max_step=lambda t, y, dy: 0.01)
    assert max(b - a for a, b in zip(res.ts, res.ts[1:])) <= 0.01 + 1e-15
    assert res.ys[-1] == pytest.approx(math.sin(3.0), abs=1e-10)
