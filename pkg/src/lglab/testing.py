"""Seeded random finite models for fuzzing the exact identities."""

from __future__ import annotations

import numpy as np

from .core import (
    Distribution,
    Measurement,
    MeasurementUpdate,
    OnticModel,
    OnticStateSpace,
    ResponseFunction,
    TransformationKernel,
)
from .lg import LgArrangement
from .operational import ObservableAssignment

PLUS = "+1"
MINUS = "-1"
OUTCOMES = (PLUS, MINUS)


def _random_distribution(rng, space) -> Distribution:
    raw = rng.random(len(space.states)) + 1e-3
    raw /= raw.sum()
    return Distribution(space, dict(zip(space.states, raw)))


def _random_kernel(rng, space) -> TransformationKernel:
    return TransformationKernel(
        space, {s: _random_distribution(rng, space) for s in space.states}
    )


def _random_measurement(rng, space, label, noninvasive=False) -> Measurement:
    table = {}
    for s in space.states:
        p = float(rng.random())
        table[s] = {PLUS: p, MINUS: 1.0 - p}
    response = ResponseFunction(space, OUTCOMES, table)
    if noninvasive:
        update = MeasurementUpdate.noninvasive(space, OUTCOMES, space.states)
    else:
        update = MeasurementUpdate(
            space,
            OUTCOMES,
            rows={
                (s, q): _random_distribution(rng, space)
                for s in space.states
                for q in OUTCOMES
            },
        )
    return Measurement(label, response, update)


def random_arrangement(rng: np.random.Generator, max_states: int = 8,
                       noninvasive_early: bool = False) -> LgArrangement:
    """A random binary three-measurement arrangement on at most max_states states.

    With ``noninvasive_early`` the first two measurements get identity
    updates (the third stays arbitrary), the regime in which every
    non-disturbance property must hold.
    """
    n = int(rng.integers(2, max_states + 1))
    space = OnticStateSpace(tuple(f"s{i}" for i in range(n)))
    model = OnticModel(
        space=space,
        preparations={"E": _random_distribution(rng, space)},
        transformations={"T1": _random_kernel(rng, space), "T2": _random_kernel(rng, space)},
        measurements={
            "M1": _random_measurement(rng, space, "M1", noninvasive=noninvasive_early),
            "M2": _random_measurement(rng, space, "M2", noninvasive=noninvasive_early),
            "M3": _random_measurement(rng, space, "M3"),
        },
    )
    return LgArrangement(
        model=model,
        preparation="E",
        transformations=("T1", "T2"),
        measurements=("M1", "M2", "M3"),
        assignment=ObservableAssignment(
            {m: {PLUS: 1, MINUS: -1} for m in ("M1", "M2", "M3")}
        ),
    )
