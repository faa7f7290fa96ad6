"""Built-in exemplar models, compiled down to finite ontic models.

Each builder returns an LgArrangement whose model is self-contained:
ontic states, preparations, transformation kernels and measurements are
all explicit finite tables, so every number downstream comes from exact
enumeration. Modelling choices that go beyond textbook definitions
(update rules, transport rules, grids) are recorded in the model
metadata.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classify import QuantityClass, check_equilibrium_property, classify
from .core import (
    Distribution,
    Measurement,
    MeasurementUpdate,
    OnticModel,
    OnticStateSpace,
    ResponseFunction,
    TransformationKernel,
)
from .errors import EngineDefectError, ModelError
from .lg import LgArrangement, disturbance_report, post_select_noninvasive
from .operational import ObservableAssignment

PLUS = "+1"
MINUS = "-1"
OUTCOMES = (PLUS, MINUS)


def _pm_assignment(*measurement_names) -> ObservableAssignment:
    return ObservableAssignment({m: {PLUS: 1, MINUS: -1} for m in set(measurement_names)})


# ---------------------------------------------------------------------------
# shared two-level amplitude helpers (used by both the qubit and the
# two-path model so that their tables agree to float precision)


def _rotate(theta: float, amps: tuple) -> tuple:
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    a, b = amps
    return (c * a - s * b, s * a + c * b)


class _ModeSet:
    """Registry of pure two-level states up to global sign.

    Exact amplitudes are kept for all arithmetic; states are merged (and
    labelled) by their sign-fixed amplitudes rounded to 12 digits.
    """

    def __init__(self):
        self.exact = {}
        self.order = []

    def add(self, amps: tuple) -> tuple:
        a, b = amps
        if a < 0.0 or (a == 0.0 and b < 0.0):
            a, b = -a, -b
        key = (round(a, 12) + 0.0, round(b, 12) + 0.0)
        if key not in self.exact:
            self.exact[key] = (a, b)
            self.order.append(key)
        return key

    def rotated(self, theta: float, key: tuple) -> tuple:
        return self.add(_rotate(theta, self.exact[key]))

    @staticmethod
    def label(key: tuple) -> str:
        return f"({key[0]:.12g},{key[1]:.12g})"


def _mode_closure(theta1: float, theta2: float, extra_starts=()):
    """Reachable pure states for the three-slot arrangement and its checks.

    Evolutions start from collapse targets (the basis) or declared
    preparations, and at most two rotations compose before a measurement
    lands the state back on the basis; the closure is therefore the
    start set plus its one- and two-rotation images. Returns the mode
    registry, the start keys, and per-rotation image maps covering the
    start and one-rotation states.
    """
    modes = _ModeSet()
    starts = [modes.add((1.0, 0.0)), modes.add((0.0, 1.0))]
    for amps in extra_starts:
        key = modes.add(amps)
        if key not in starts:
            starts.append(key)
    images = {"r1": {}, "r2": {}}
    level1 = []
    for tag, theta in (("r1", theta1), ("r2", theta2)):
        for key in starts:
            img = modes.rotated(theta, key)
            images[tag][key] = img
            if img not in level1:
                level1.append(img)
    for tag, theta in (("r1", theta1), ("r2", theta2)):
        for key in level1:
            if key not in images[tag]:
                images[tag][key] = modes.rotated(theta, key)
    return modes, starts, images


# ---------------------------------------------------------------------------
# bare quantum qubit


def build_qubit_arrangement(theta1: float, theta2: float) -> LgArrangement:
    """Projective-measurement qubit: prepare the +1 eigenstate, rotate, read.

    Ontic states are the protocol-reachable pure states (a finite set),
    the response is the squared overlap with the reading basis, and the
    update collapses onto the recorded eigenstate.
    """
    modes, starts, images = _mode_closure(theta1, theta2)
    e0, e1 = starts[0], starts[1]
    labels = {key: f"q{_ModeSet.label(key)}" for key in modes.order}
    space = OnticStateSpace(tuple(labels[key] for key in modes.order))

    response = ResponseFunction(
        space,
        OUTCOMES,
        {
            labels[key]: {
                PLUS: modes.exact[key][0] ** 2,
                MINUS: modes.exact[key][1] ** 2,
            }
            for key in modes.order
        },
    )
    update = MeasurementUpdate(
        space,
        OUTCOMES,
        outcome_rows={
            PLUS: Distribution.point_mass(space, labels[e0]),
            MINUS: Distribution.point_mass(space, labels[e1]),
        },
    )
    measurement = Measurement("Mz", response, update)

    kernels = {
        name: TransformationKernel(
            space,
            {
                labels[key]: Distribution.point_mass(space, labels[img])
                for key, img in images[tag].items()
            },
        )
        for name, tag in (("rot1", "r1"), ("rot2", "r2"))
    }

    model = OnticModel(
        space=space,
        preparations={"up": Distribution.point_mass(space, labels[e0])},
        transformations=kernels,
        measurements={"Mz": measurement},
        metadata={
            "family": "qubit",
            "theta1": theta1,
            "theta2": theta2,
            "ontic_states": "protocol-reachable pure states",
            "quantity_classes": {"Q": ["Mz"]},
        },
    )
    return LgArrangement(
        model=model,
        preparation="up",
        transformations=("rot1", "rot2"),
        measurements=("Mz", "Mz", "Mz"),
        assignment=_pm_assignment("Mz"),
    )


# ---------------------------------------------------------------------------
# superselected quantum / classical two-state chain


def build_superselected_arrangement(p1: float, p2: float) -> LgArrangement:
    """Two-state model whose only preparations are basis states and mixtures.

    Rotations decohere into stochastic flip matrices with the given flip
    probabilities; readout is exact with an identity update. This is
    simultaneously the decohered-qubit and the classical Markov-chain
    exemplar.
    """
    for p in (p1, p2):
        if not 0.0 <= p <= 1.0:
            raise ModelError(f"flip probability {p!r} outside [0, 1]")
    space = OnticStateSpace(("up", "down"))
    point_up = Distribution.point_mass(space, "up")
    point_down = Distribution.point_mass(space, "down")

    def flip_kernel(p):
        return TransformationKernel(
            space,
            {
                "up": Distribution(space, {"up": 1.0 - p, "down": p}),
                "down": Distribution(space, {"down": 1.0 - p, "up": p}),
            },
        )

    response = ResponseFunction(
        space,
        OUTCOMES,
        {"up": {PLUS: 1.0, MINUS: 0.0}, "down": {PLUS: 0.0, MINUS: 1.0}},
    )
    update = MeasurementUpdate.noninvasive(space, OUTCOMES, space.states)
    model = OnticModel(
        space=space,
        preparations={
            "prep-up": point_up,
            "prep-down": point_down,
            "prep-mixed": Distribution(space, {"up": 0.5, "down": 0.5}),
        },
        transformations={"flip1": flip_kernel(p1), "flip2": flip_kernel(p2)},
        measurements={"read": Measurement("read", response, update)},
        metadata={
            "family": "superselected",
            "p1": p1,
            "p2": p2,
            "quantity_classes": {"Q": ["read"]},
        },
    )
    return LgArrangement(
        model=model,
        preparation="prep-up",
        transformations=("flip1", "flip2"),
        measurements=("read", "read", "read"),
        assignment=_pm_assignment("read"),
    )


# ---------------------------------------------------------------------------
# Kochen-Specker sphere model for a two-level system


def _fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic low-discrepancy unit vectors; no point on the equator for even n."""
    k = np.arange(n)
    z = 1.0 - (2.0 * k + 1.0) / n
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    phi = 2.0 * math.pi * k / golden
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack((r * np.cos(phi), r * np.sin(phi), z))


def _rotation_about_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _hemisphere_density(points: np.ndarray, direction) -> np.ndarray:
    dots = points @ np.asarray(direction, dtype=float)
    w = np.where(dots > 0.0, dots, 0.0)
    return w / w.sum()


def build_ks_arrangement(n_points: int, theta1: float, theta2: float) -> LgArrangement:
    """Non-contextual hidden-variable sphere model reproducing qubit statistics.

    Ontic states are grid points on the unit sphere (one copy per
    rotation stage reached by the arrangement); a preparation towards
    direction s weights the grid by the standard hemisphere density
    proportional to n.s; the reading is the deterministic sign of n.z;
    and the update re-samples the recorded eigenstate density on the
    base grid, a surrogate rule chosen to reproduce sequential
    statistics while keeping eigenstate preparations exact fixed points.
    """
    if n_points < 100:
        raise ModelError("sphere grid needs at least 100 points")
    base = _fibonacci_sphere(n_points)
    # Measurement updates land back on the base grid, so at most two
    # rotations compose; one grid copy per reachable angle suffices.
    angles = [0.0]
    level1 = []
    for theta in (theta1, theta2):
        if theta not in angles:
            angles.append(theta)
        level1.append(theta)
    for theta in (theta1, theta2):
        for a in level1:
            if a + theta not in angles:
                angles.append(a + theta)
    stage_of = {angle: i for i, angle in enumerate(angles)}
    stage_points = {i: _rotation_about_y(a) @ base.T for a, i in stage_of.items()}

    labels = []
    plus_rows = {}
    for i in range(len(angles)):
        z = stage_points[i][2]
        for k in range(n_points):
            labels.append(f"r{i}:{k}")
        plus_rows[i] = z >= 0.0
    space = OnticStateSpace(tuple(labels))

    row_plus = {PLUS: 1.0, MINUS: 0.0}
    row_minus = {PLUS: 0.0, MINUS: 1.0}
    response = ResponseFunction(
        space,
        OUTCOMES,
        {
            f"r{i}:{k}": (row_plus if plus_rows[i][k] else row_minus)
            for i in range(len(angles))
            for k in range(n_points)
        },
    )

    def base_density(direction) -> Distribution:
        w = _hemisphere_density(base, direction)
        return Distribution(
            space, {f"r0:{k}": w[k] for k in range(n_points) if w[k] > 0.0}
        )

    up = base_density((0.0, 0.0, 1.0))
    down = base_density((0.0, 0.0, -1.0))
    side = base_density((1.0, 0.0, 0.0))
    update = MeasurementUpdate(space, OUTCOMES, outcome_rows={PLUS: up, MINUS: down})
    measurement = Measurement("Mz", response, update)

    def stage_shift(angle):
        rows = {}
        for domain_angle in dict.fromkeys([0.0] + level1):
            si = stage_of[domain_angle]
            ti = stage_of[domain_angle + angle]
            for k in range(n_points):
                rows[f"r{si}:{k}"] = Distribution.point_mass(space, f"r{ti}:{k}")
        return TransformationKernel(space, rows)

    rot1 = stage_shift(theta1)
    rot2 = stage_shift(theta2)

    model = OnticModel(
        space=space,
        preparations={"up": up, "down": down, "side": side},
        transformations={"rot1": rot1, "rot2": rot2},
        measurements={"Mz": measurement},
        metadata={
            "family": "ks-sphere",
            "n_points": n_points,
            "theta1": theta1,
            "theta2": theta2,
            "grid": "fibonacci lattice, one copy per reached rotation stage",
            "stage_angles": list(angles),
            "update_rule": (
                "posterior eigenstate re-sampling onto the base grid; surrogate "
                "chosen to reproduce sequential statistics"
            ),
            "response_rule": "sign of n.z, +1 on the boundary",
            "quantity_classes": {"Q": ["Mz"]},
        },
    )
    return LgArrangement(
        model=model,
        preparation="up",
        transformations=("rot1", "rot2"),
        measurements=("Mz", "Mz", "Mz"),
        assignment=_pm_assignment("Mz"),
    )


def ks_direction_measurement(model: OnticModel, direction, label: str = "probe") -> Measurement:
    """A deterministic reading along an arbitrary direction, on the base grid.

    Intended for single-shot probing of the sphere model (the update is
    empty; the measurement is not meant to be inserted mid-protocol).
    """
    meta = model.metadata
    if meta.get("family") != "ks-sphere":
        raise ModelError("direction probes are only defined for the sphere model")
    base = _fibonacci_sphere(meta["n_points"])
    dots = base @ np.asarray(direction, dtype=float)
    rows = {}
    for k in range(meta["n_points"]):
        rows[f"r0:{k}"] = {PLUS: 1.0, MINUS: 0.0} if dots[k] >= 0.0 else {PLUS: 0.0, MINUS: 1.0}
    response = ResponseFunction(model.space, OUTCOMES, rows)
    return Measurement(label, response, MeasurementUpdate(model.space, OUTCOMES))


# ---------------------------------------------------------------------------
# two-path model with value-definite path bit


def build_bohm_arrangement(theta1: float, theta2: float) -> LgArrangement:
    """Two-path model: ontic state = (mode amplitudes, which-path bit).

    The which-path reading returns the bit deterministically, so every
    ontic state is value-definite; the update collapses the mode onto
    the recorded branch and leaves the bit alone. Rotations move the
    mode deterministically and redistribute the bit by the
    minimal-transport (monotone coupling) rule that matches the new mode
    weights, a surrogate for a guidance law. Operational statistics
    coincide with the bare qubit's.
    """
    half = math.sqrt(0.5)
    modes, starts, images = _mode_closure(theta1, theta2, extra_starts=[(half, half)])
    e0, e1 = starts[0], starts[1]
    superposed = starts[-1] if len(starts) > 2 else modes.add((half, half))

    def path_weight(key, path):
        amp = modes.exact[key][0] if path == 1 else modes.exact[key][1]
        return amp * amp

    states = [
        (key, path)
        for key in modes.order
        for path in (1, 2)
        if path_weight(key, path) > 0.0
    ]
    labels = {s: f"p{s[1]}|{_ModeSet.label(s[0])}" for s in states}
    space = OnticStateSpace(tuple(labels[s] for s in states))

    response = ResponseFunction(
        space,
        OUTCOMES,
        {
            labels[s]: {PLUS: 1.0, MINUS: 0.0} if s[1] == 1 else {PLUS: 0.0, MINUS: 1.0}
            for s in states
        },
    )
    update_rows = {}
    for s in states:
        _, path = s
        branch = (e0, 1) if path == 1 else (e1, 2)
        outcome = PLUS if path == 1 else MINUS
        update_rows[(labels[s], outcome)] = Distribution.point_mass(space, labels[branch])
    measurement = Measurement(
        "path", response, MeasurementUpdate(space, OUTCOMES, rows=update_rows)
    )

    def transport_row(key, path, new_key) -> Distribution:
        p_old = path_weight(key, 1)
        p_new = path_weight(new_key, 1)
        if path == 1:
            stay = min(p_old, p_new) / p_old
        else:
            stay = min(1.0 - p_old, 1.0 - p_new) / (1.0 - p_old)
        same, other = (1, 2) if path == 1 else (2, 1)
        weights = {}
        if stay > 0.0:
            weights[labels[(new_key, same)]] = stay
        if stay < 1.0:
            weights[labels[(new_key, other)]] = 1.0 - stay
        return Distribution(space, weights)

    kernels = {}
    for name, tag in (("rot1", "r1"), ("rot2", "r2")):
        rows = {}
        for key, img in images[tag].items():
            for path in (1, 2):
                if (key, path) in labels:
                    rows[labels[(key, path)]] = transport_row(key, path, img)
        kernels[name] = TransformationKernel(space, rows)

    model = OnticModel(
        space=space,
        preparations={
            "up": Distribution.point_mass(space, labels[(e0, 1)]),
            "down": Distribution.point_mass(space, labels[(e1, 2)]),
            "superposed": Distribution(
                space,
                {
                    labels[(superposed, 1)]: path_weight(superposed, 1),
                    labels[(superposed, 2)]: path_weight(superposed, 2),
                },
            ),
        },
        transformations=kernels,
        measurements={"path": measurement},
        metadata={
            "family": "bohm-two-path",
            "theta1": theta1,
            "theta2": theta2,
            "transport_rule": (
                "monotone coupling matching the new mode weights (minimal transport); "
                "surrogate for a guidance law"
            ),
            "quantity_classes": {"Q": ["path"]},
        },
    )
    return LgArrangement(
        model=model,
        preparation="up",
        transformations=("rot1", "rot2"),
        measurements=("path", "path", "path"),
        assignment=_pm_assignment("path"),
    )


# ---------------------------------------------------------------------------
# engineered counterexample fixtures


@dataclass(frozen=True)
class Fixture:
    """A hand-built model with verdicts verified at build time."""

    name: str
    description: str
    model: OnticModel
    arrangement: Optional[LgArrangement]
    expected: dict = field(default_factory=dict)


def _fixture_lgi_holds_d_nonzero() -> Fixture:
    """Two-state chain with a state-kicking update.

    The readout is exact but pushes the state around, so the marginal
    statistics of the later pair shift by a macroscopic amount while the
    pairwise inequality still holds: disturbance is necessary, not
    sufficient, for violation.
    """
    kick = 0.4
    drift = 0.05
    space = OnticStateSpace(("a", "b"))
    response = ResponseFunction(
        space,
        OUTCOMES,
        {"a": {PLUS: 1.0, MINUS: 0.0}, "b": {PLUS: 0.0, MINUS: 1.0}},
    )
    update = MeasurementUpdate(
        space,
        OUTCOMES,
        rows={
            ("a", PLUS): Distribution(space, {"a": 1.0 - kick, "b": kick}),
            ("b", MINUS): Distribution(space, {"b": 1.0 - kick, "a": kick}),
        },
    )

    def drift_kernel():
        return TransformationKernel(
            space,
            {
                "a": Distribution(space, {"a": 1.0 - drift, "b": drift}),
                "b": Distribution(space, {"b": 1.0 - drift, "a": drift}),
            },
        )

    model = OnticModel(
        space=space,
        preparations={"start": Distribution.point_mass(space, "a")},
        transformations={"drift1": drift_kernel(), "drift2": drift_kernel()},
        measurements={"kick-read": Measurement("kick-read", response, update)},
        metadata={
            "family": "fixture",
            "kick": kick,
            "drift": drift,
            "quantity_classes": {"Q": ["kick-read"]},
        },
    )
    arrangement = LgArrangement(
        model=model,
        preparation="start",
        transformations=("drift1", "drift2"),
        measurements=("kick-read", "kick-read", "kick-read"),
        assignment=_pm_assignment("kick-read"),
    )
    report = disturbance_report(arrangement)
    if not (report.max_disturbance() > 0.1 and report.lg_pairwise >= -1.0):
        raise EngineDefectError(
            "fixture lgi-holds-d-nonzero failed build-time verification: "
            f"max |D| = {report.max_disturbance():.4g}, "
            f"pairwise value = {report.lg_pairwise:.4g}"
        )
    return Fixture(
        name="lgi-holds-d-nonzero",
        description="disturbing readout whose pairwise inequality still holds",
        model=model,
        arrangement=arrangement,
        expected={"max_disturbance_above": 0.1, "lg_pairwise_at_least": -1.0},
    )


def _fixture_null_result_pair() -> Fixture:
    """Two equivalent readings, each noninvasive for one outcome only.

    Post-selecting the untouched outcome of a fair choice between them
    yields a composite that never moves any ontic state on kept runs.
    """
    space = OnticStateSpace(("l1", "l2", "l3", "l4"))
    rows = {
        "l1": {PLUS: 1.0, MINUS: 0.0},
        "l2": {PLUS: 1.0, MINUS: 0.0},
        "l3": {PLUS: 0.0, MINUS: 1.0},
        "l4": {PLUS: 0.0, MINUS: 1.0},
    }
    point = {s: Distribution.point_mass(space, s) for s in space.states}
    null_plus = Measurement(
        "null-plus",
        ResponseFunction(space, OUTCOMES, rows),
        MeasurementUpdate(
            space,
            OUTCOMES,
            rows={
                ("l1", PLUS): point["l1"],
                ("l2", PLUS): point["l2"],
                ("l3", MINUS): point["l4"],
                ("l4", MINUS): point["l3"],
            },
        ),
    )
    null_minus = Measurement(
        "null-minus",
        ResponseFunction(space, OUTCOMES, rows),
        MeasurementUpdate(
            space,
            OUTCOMES,
            rows={
                ("l3", MINUS): point["l3"],
                ("l4", MINUS): point["l4"],
                ("l1", PLUS): point["l2"],
                ("l2", PLUS): point["l1"],
            },
        ),
    )
    stir = TransformationKernel(
        space,
        {
            "l1": Distribution(space, {"l1": 0.8, "l2": 0.2}),
            "l2": Distribution(space, {"l2": 0.8, "l1": 0.2}),
            "l3": Distribution(space, {"l3": 0.8, "l4": 0.2}),
            "l4": Distribution(space, {"l4": 0.8, "l3": 0.2}),
        },
    )
    model = OnticModel(
        space=space,
        preparations={
            "spread": Distribution(space, {"l1": 0.3, "l2": 0.2, "l3": 0.25, "l4": 0.25}),
            "tilted": Distribution(space, {"l1": 0.5, "l3": 0.5}),
        },
        transformations={"stir": stir},
        measurements={"null-plus": null_plus, "null-minus": null_minus},
        metadata={
            "family": "fixture",
            "quantity_classes": {"Q": ["null-plus", "null-minus"]},
        },
    )
    result = post_select_noninvasive(model, ("null-plus", PLUS), ("null-minus", MINUS))
    if not (result.matches_input and result.max_deviation_from_input <= 1e-12):
        raise EngineDefectError("fixture null-result-pair failed build-time verification")
    return Fixture(
        name="null-result-pair",
        description="equivalent readings, each noninvasive for one outcome",
        model=model,
        arrangement=None,
        expected={"post_selection_matches_input_within": 1e-12},
    )


def _fixture_support_mr_minimal() -> Fixture:
    """Three-state model whose extra preparation sits inside eigenstate supports
    without being a mixture of the eigenstate preparations."""
    space = OnticStateSpace(("x", "y", "z"))
    plus_prep = Distribution(space, {"x": 0.5, "y": 0.5})
    minus_prep = Distribution.point_mass(space, "z")
    response = ResponseFunction(
        space,
        OUTCOMES,
        {
            "x": {PLUS: 1.0, MINUS: 0.0},
            "y": {PLUS: 1.0, MINUS: 0.0},
            "z": {PLUS: 0.0, MINUS: 1.0},
        },
    )
    update = MeasurementUpdate(
        space, OUTCOMES, outcome_rows={PLUS: plus_prep, MINUS: minus_prep}
    )
    model = OnticModel(
        space=space,
        preparations={
            "plus-prep": plus_prep,
            "minus-prep": minus_prep,
            # straddles both values, so it is not an eigenstate preparation
            # itself, and its x/y split rules out any mixture of the two
            "lopsided": Distribution(space, {"x": 0.8, "y": 0.1, "z": 0.1}),
        },
        transformations={},
        measurements={"look": Measurement("look", response, update)},
        metadata={"family": "fixture", "quantity_classes": {"Q": ["look"]}},
    )
    verdict = classify(model, QuantityClass.verified(model, "Q", ["look"])).verdict
    if verdict != "MR2":
        raise EngineDefectError(
            f"fixture support-mr-minimal failed build-time verification: {verdict}"
        )
    return Fixture(
        name="support-mr-minimal",
        description="support containment without mixture membership",
        model=model,
        arrangement=None,
        expected={"verdict": "MR2"},
    )


def _fixture_drifting_update() -> Fixture:
    """Readout whose update swaps the eigenstates: no fixed-point property."""
    space = OnticStateSpace(("u", "v"))
    response = ResponseFunction(
        space,
        OUTCOMES,
        {"u": {PLUS: 1.0, MINUS: 0.0}, "v": {PLUS: 0.0, MINUS: 1.0}},
    )
    update = MeasurementUpdate(
        space,
        OUTCOMES,
        rows={
            ("u", PLUS): Distribution.point_mass(space, "v"),
            ("v", MINUS): Distribution.point_mass(space, "u"),
        },
    )
    model = OnticModel(
        space=space,
        preparations={
            "u-prep": Distribution.point_mass(space, "u"),
            "v-prep": Distribution.point_mass(space, "v"),
        },
        transformations={},
        measurements={"swapper": Measurement("swapper", response, update)},
        metadata={"family": "fixture", "quantity_classes": {"Q": ["swapper"]}},
    )
    equilibrium = check_equilibrium_property(
        model, QuantityClass.verified(model, "Q", ["swapper"]), "swapper"
    )
    if equilibrium.holds:
        raise EngineDefectError("fixture drifting-update failed build-time verification")
    return Fixture(
        name="drifting-update",
        description="eigenstate preparations are not fixed points of the update",
        model=model,
        arrangement=None,
        expected={"equilibrium_fixed_point": False},
    )


def build_fixtures() -> dict:
    """All engineered fixtures, re-verified on every build."""
    fixtures = [
        _fixture_lgi_holds_d_nonzero(),
        _fixture_null_result_pair(),
        _fixture_support_mr_minimal(),
        _fixture_drifting_update(),
    ]
    return {f.name: f for f in fixtures}


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class ZooBuild:
    """A zoo model plus the analysis objects it ships with."""

    name: str
    model: OnticModel
    arrangement: Optional[LgArrangement]
    expected: dict = field(default_factory=dict)


_DESCRIPTIONS = {
    "qubit": "projective qubit on its reachable pure states; violates the pairwise inequality",
    "superselected": "two basis states with stochastic flips and exact readout; mixture-macrorealist exemplar (also the classical chain)",
    "ks-sphere": "non-contextual sphere model matching qubit statistics; support-macrorealist exemplar",
    "bohm-two-path": "value-definite path bit riding on qubit statistics; supra-support exemplar",
    "lgi-holds-d-nonzero": "disturbing readout whose pairwise inequality still holds",
    "null-result-pair": "pair of one-outcome-noninvasive readings for the post-selection composite",
    "support-mr-minimal": "minimal three-state support-macrorealist model",
    "drifting-update": "update without the eigenstate fixed-point property",
}

_DEFAULT_PARAMS = {
    "qubit": {"theta1": 2.0 * math.pi / 3.0, "theta2": 2.0 * math.pi / 3.0},
    "superselected": {"p1": 0.25, "p2": 0.25},
    "ks-sphere": {
        "n_points": 10_000,
        "theta1": 2.0 * math.pi / 3.0,
        "theta2": 2.0 * math.pi / 3.0,
    },
    "bohm-two-path": {"theta1": 2.0 * math.pi / 3.0, "theta2": 2.0 * math.pi / 3.0},
}


def list_models():
    """Stable listing of zoo entries: (name, description)."""
    return [(name, _DESCRIPTIONS[name]) for name in _DESCRIPTIONS]


def build(name: str, **params) -> ZooBuild:
    """Build a zoo model by name; parameters default per _DEFAULT_PARAMS."""
    if name in _DEFAULT_PARAMS:
        merged = dict(_DEFAULT_PARAMS[name])
        unknown = set(params) - set(merged)
        if unknown:
            raise ModelError(f"unknown parameters {sorted(unknown)} for zoo model {name!r}")
        merged.update({k: v for k, v in params.items() if v is not None})
        builder = {
            "qubit": build_qubit_arrangement,
            "superselected": build_superselected_arrangement,
            "ks-sphere": build_ks_arrangement,
            "bohm-two-path": build_bohm_arrangement,
        }[name]
        arrangement = builder(**merged)
        return ZooBuild(name=name, model=arrangement.model, arrangement=arrangement)
    fixtures = build_fixtures()
    if name in fixtures:
        if params:
            raise ModelError(f"fixture {name!r} takes no parameters")
        f = fixtures[name]
        return ZooBuild(name=name, model=f.model, arrangement=f.arrangement, expected=f.expected)
    raise ModelError(f"unknown zoo model {name!r}; try one of {sorted(_DESCRIPTIONS)}")
