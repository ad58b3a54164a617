"""Adaptive Dormand-Prince 5(4) integrator for a scalar ODE ``y' = f(t, y)``.

Written for the boundary ODE, whose right-hand side blows up at the edge of
its domain: ``f`` may raise :class:`~breakthrough_timing.diffusion.DomainError`
on a stage outside the domain, and the step is then rejected and shrunk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .diffusion import DomainError

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
# difference between the 5th and embedded 4th order weights, last entry for k7
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


@dataclass
class IntegrationResult:
    """Accepted points of an integration.

    ``status`` is ``"done"`` (reached ``t_end``), ``"event"`` (the event
    callback returned a label, stored in ``event``), ``"underflow"`` (step
    size fell below the floor) or ``"nonfinite"``.
    """

    ts: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    dys: list = field(default_factory=list)
    status: str = "done"
    event: str | None = None
    n_rejected: int = 0


def dormand_prince(f, t0, y0, t_end, rtol=1e-10, atol=1e-12, h0=None,
                   max_step=None, event=None, max_steps=1_000_000) -> IntegrationResult:
    """Integrate from ``t0`` to ``t_end`` (``t_end > t0``).

    Parameters
    ----------
    f : callable ``(t, y) -> float``
        Right-hand side; may raise ``DomainError``.
    max_step : callable ``(t, y, dy) -> float``, optional
        Cap on the next step, e.g. a fraction of the distance to a singularity.
    event : callable ``(t, y, dy) -> str | None``, optional
        Checked after every accepted step; a non-``None`` label stops the run.
    """
    res = IntegrationResult()
    t, y = float(t0), float(y0)
    k1 = f(t, y)
    res.ts.append(t)
    res.ys.append(y)
    res.dys.append(k1)
    if not math.isfinite(k1):
        res.status = "nonfinite"
        return res
    span = t_end - t
    h = h0 if h0 is not None else 1e-4 * span
    h_floor = 1e-14 * max(1.0, abs(t_end))
    rejected_last = False
    for _ in range(max_steps):
        if t >= t_end:
            return res
        if max_step is not None:
            h = min(h, max_step(t, y, k1))
        h = min(h, t_end - t)
        if h < h_floor:
            res.status = "underflow"
            return res
        try:
            ks = [k1]
            for i in range(1, 6):
                yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
                ks.append(f(t + _C[i] * h, yi))
            y_new = y + h * sum(b * k for b, k in zip(_B, ks))
            k7 = f(t + h, y_new)
        except DomainError:
            h *= 0.25
            res.n_rejected += 1
            rejected_last = True
            continue
        ks.append(k7)
        if not all(math.isfinite(k) for k in ks):
            h *= 0.25
            res.n_rejected += 1
            rejected_last = True
            continue
        err = abs(h * sum(e * k for e, k in zip(_E, ks)))
        scale = atol + rtol * max(abs(y), abs(y_new))
        ratio = err / scale
        if ratio <= 1.0:
            t = t_end if t_end - (t + h) < h_floor else t + h
            y, k1 = y_new, k7
            res.ts.append(t)
            res.ys.append(y)
            res.dys.append(k1)
            if event is not None:
                label = event(t, y, k1)
                if label is not None:
                    res.status = "event"
                    res.event = label
                    return res
            fac = 5.0 if ratio == 0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            if rejected_last:
                fac = min(fac, 1.0)
            h *= fac
            rejected_last = False
        else:
            h *= max(0.2, 0.9 * ratio ** -0.2)
            res.n_rejected += 1
            rejected_last = True
    res.status = "underflow"
    return res
