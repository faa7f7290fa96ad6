import math

import numpy as np
import pytest

from lglab import (
    ModelError,
    check_macrodefinite,
    lg_value_pairwise,
    run_protocol,
    single_shot_probability,
)
from lglab.classify import QuantityClass
from lglab import zoo

PLUS, MINUS = "+1", "-1"
TWO_THIRDS_PI = 2.0 * math.pi / 3.0
MASKS = (
    (True, True, True),
    (True, True, False),
    (True, False, True),
    (False, True, True),
)


class TestQubit:
    def test_frozen_dynamics(self):
        assert lg_value_pairwise(zoo.build_qubit_arrangement(0.0, 0.0)) == pytest.approx(3.0)

    def test_boundary_at_half_pi(self):
        arr = zoo.build_qubit_arrangement(math.pi / 2.0, math.pi / 2.0)
        assert lg_value_pairwise(arr) == pytest.approx(-1.0, abs=1e-12)

    def test_global_minimum_angles(self):
        arr = zoo.build_qubit_arrangement(TWO_THIRDS_PI, TWO_THIRDS_PI)
        assert lg_value_pairwise(arr) == pytest.approx(-1.5, abs=1e-9)

    def test_engine_matches_sequential_closed_form(self):
        # pair correlators: cos t1 + cos(t1 + t2) + cos t2, from one-step
        # overlap factors; an oracle independent of the propagation engine
        rng = np.random.default_rng(2)
        for _ in range(12):
            t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
            arr = zoo.build_qubit_arrangement(t1, t2)
            want = math.cos(t1) + math.cos(t1 + t2) + math.cos(t2)
            assert lg_value_pairwise(arr) == pytest.approx(want, abs=1e-12)

    def test_single_shot_born_rule(self):
        arr = zoo.build_qubit_arrangement(1.1, 0.4)
        model = arr.model
        p = single_shot_probability(
            model.preparations["up"], model.transformations["rot1"],
            model.measurements["Mz"], PLUS,
        )
        assert p == pytest.approx(math.cos(1.1 / 2.0) ** 2, abs=1e-12)


class TestSuperselected:
    def test_no_flips_freezes_history(self):
        assert lg_value_pairwise(zoo.build_superselected_arrangement(0.0, 0.0)) == 3.0

    def test_quarter_flip_value(self):
        arr = zoo.build_superselected_arrangement(0.25, 0.25)
        assert lg_value_pairwise(arr) == pytest.approx(1.25, abs=1e-12)

    def test_half_flip_decorrelates(self):
        arr = zoo.build_superselected_arrangement(0.5, 0.5)
        assert lg_value_pairwise(arr) == pytest.approx(0.0, abs=1e-12)

    def test_invalid_probability_rejected(self):
        with pytest.raises(ModelError):
            zoo.build_superselected_arrangement(1.5, 0.0)


class TestKsSphere:
    N = 2000

    def test_aligned_reading_is_certain(self):
        arr = zoo.build_ks_arrangement(self.N, 1.0, 1.0)
        p = single_shot_probability(
            arr.model.preparations["up"], None, arr.model.measurements["Mz"], PLUS
        )
        assert p == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_reading_splits(self):
        arr = zoo.build_ks_arrangement(self.N, 1.0, 1.0)
        probe = zoo.ks_direction_measurement(arr.model, (1.0, 0.0, 0.0))
        p = single_shot_probability(arr.model.preparations["up"], None, probe, PLUS)
        assert p == pytest.approx(0.5, abs=5e-3)

    def test_born_rule_converges_with_grid(self):
        direction = np.array([math.sin(1.0), 0.0, math.cos(1.0)])
        exact = math.cos(0.5) ** 2
        errors = []
        for n in (500, 4000):
            arr = zoo.build_ks_arrangement(n, 1.0, 1.0)
            probe = zoo.ks_direction_measurement(arr.model, direction)
            p = single_shot_probability(arr.model.preparations["up"], None, probe, PLUS)
            errors.append(abs(p - exact))
        assert errors[1] < errors[0]
        assert errors[1] < 2e-3

    def test_pairwise_value_tracks_quantum(self):
        arr = zoo.build_ks_arrangement(self.N, TWO_THIRDS_PI, TWO_THIRDS_PI)
        assert lg_value_pairwise(arr) == pytest.approx(-1.5, abs=5e-2)

    def test_reading_is_value_definite_everywhere(self):
        arr = zoo.build_ks_arrangement(500, 1.0, 2.0)
        cls = QuantityClass.verified(arr.model, "Q", ["Mz"])
        assert check_macrodefinite(arr.model, cls).holds

    def test_grid_size_floor(self):
        with pytest.raises(ModelError):
            zoo.build_ks_arrangement(50, 1.0, 1.0)


class TestTwoPath:
    def test_tables_match_qubit_everywhere(self):
        for t1, t2 in ((TWO_THIRDS_PI, TWO_THIRDS_PI), (0.7, 2.4), (math.pi / 2, 1.9)):
            q = zoo.build_qubit_arrangement(t1, t2)
            b = zoo.build_bohm_arrangement(t1, t2)
            for mask in MASKS:
                jq = run_protocol(q.model, q.protocol(mask))
                jb = run_protocol(b.model, b.protocol(mask))
                worst = max(abs(jq.table[k] - jb.table[k]) for k in jq.table)
                assert worst <= 1e-12

    def test_path_bit_is_value_definite(self):
        arr = zoo.build_bohm_arrangement(TWO_THIRDS_PI, TWO_THIRDS_PI)
        cls = QuantityClass.verified(arr.model, "Q", ["path"])
        assert check_macrodefinite(arr.model, cls).holds

    def test_violates_with_definite_paths(self):
        arr = zoo.build_bohm_arrangement(TWO_THIRDS_PI, TWO_THIRDS_PI)
        assert lg_value_pairwise(arr) == pytest.approx(-1.5, abs=1e-9)


class TestFixtures:
    def test_registry_is_stable(self):
        names = [name for name, _ in zoo.list_models()]
        assert names == [
            "qubit",
            "superselected",
            "ks-sphere",
            "bohm-two-path",
            "lgi-holds-d-nonzero",
            "null-result-pair",
            "support-mr-minimal",
            "drifting-update",
        ]

    def test_fixtures_reverify_on_build(self):
        fixtures = zoo.build_fixtures()
        assert set(fixtures) >= {
            "lgi-holds-d-nonzero",
            "null-result-pair",
            "support-mr-minimal",
        }

    def test_unknown_name_rejected(self):
        with pytest.raises(ModelError):
            zoo.build("no-such-model")

    def test_fixture_takes_no_parameters(self):
        with pytest.raises(ModelError):
            zoo.build("null-result-pair", theta1=1.0)

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ModelError):
            zoo.build("qubit", n_points=10)
