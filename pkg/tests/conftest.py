import pytest

from lglab import (
    Distribution,
    Measurement,
    MeasurementUpdate,
    OnticModel,
    OnticStateSpace,
    ResponseFunction,
    TransformationKernel,
)

PLUS = "+1"
MINUS = "-1"
OUTCOMES = (PLUS, MINUS)


@pytest.fixture
def spin_model():
    """Four pure states |0>, |1>, |+>, |-> with projective z and x readings.

    Small enough to verify every number by hand; rich enough to exhibit
    collapse-induced disturbance (measuring z destroys x statistics).
    """
    space = OnticStateSpace(("z0", "z1", "x0", "x1"))
    point = {s: Distribution.point_mass(space, s) for s in space.states}
    half = {PLUS: 0.5, MINUS: 0.5}

    mz = Measurement(
        "Mz",
        ResponseFunction(
            space,
            OUTCOMES,
            {
                "z0": {PLUS: 1.0, MINUS: 0.0},
                "z1": {PLUS: 0.0, MINUS: 1.0},
                "x0": dict(half),
                "x1": dict(half),
            },
        ),
        MeasurementUpdate(space, OUTCOMES, outcome_rows={PLUS: point["z0"], MINUS: point["z1"]}),
    )
    mx = Measurement(
        "Mx",
        ResponseFunction(
            space,
            OUTCOMES,
            {
                "x0": {PLUS: 1.0, MINUS: 0.0},
                "x1": {PLUS: 0.0, MINUS: 1.0},
                "z0": dict(half),
                "z1": dict(half),
            },
        ),
        MeasurementUpdate(space, OUTCOMES, outcome_rows={PLUS: point["x0"], MINUS: point["x1"]}),
    )
    # same response statistics as Mz but a forgetful update
    mz_alt = Measurement(
        "Mz-alt",
        ResponseFunction(space, OUTCOMES, dict(mz.response.table)),
        MeasurementUpdate(space, OUTCOMES, outcome_rows={PLUS: point["z0"], MINUS: point["z0"]}),
    )
    return OnticModel(
        space=space,
        preparations={"zero": point["z0"], "one": point["z1"], "plus": point["x0"]},
        transformations={"id": TransformationKernel.identity(space)},
        measurements={"Mz": mz, "Mx": mx, "Mz-alt": mz_alt},
    )
