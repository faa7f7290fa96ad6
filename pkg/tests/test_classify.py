import math

import pytest

from lglab import (
    ClassificationError,
    Distribution,
    Measurement,
    MeasurementUpdate,
    OnticModel,
    OnticStateSpace,
    ResponseFunction,
    check_equilibrium_property,
    check_macrodefinite,
    classify,
    operational_eigenstate_supports,
)
from lglab.classify import QuantityClass
from lglab import zoo

PLUS, MINUS = "+1", "-1"


def model_class(build):
    label, members = next(iter(build.model.metadata["quantity_classes"].items()))
    return QuantityClass.verified(build.model, label, members)


class TestMacrodefinite:
    def test_chain_readout_is_definite(self):
        build = zoo.build("superselected")
        assert check_macrodefinite(build.model, model_class(build)).holds

    def test_qubit_superposed_state_witnessed(self):
        build = zoo.build("qubit")
        result = check_macrodefinite(build.model, model_class(build))
        assert not result.holds
        states = {s for s, _, _ in result.witnesses}
        assert any(s.startswith("q(0.5") or "0.866" in s for s in states)

    def test_class_members_must_agree(self, spin_model):
        space = spin_model.space
        flipped = Measurement(
            "flipped",
            ResponseFunction(
                space,
                (PLUS, MINUS),
                {
                    "z0": {PLUS: 0.0, MINUS: 1.0},
                    "z1": {PLUS: 1.0, MINUS: 0.0},
                    "x0": {PLUS: 0.5, MINUS: 0.5},
                    "x1": {PLUS: 0.5, MINUS: 0.5},
                },
            ),
            MeasurementUpdate.noninvasive(space, (PLUS, MINUS), space.states),
        )
        model = OnticModel(
            space=space,
            preparations=dict(spin_model.preparations),
            transformations=dict(spin_model.transformations),
            measurements={**spin_model.measurements, "flipped": flipped},
        )
        cls = QuantityClass("Q", ("Mz", "flipped"))
        result = check_macrodefinite(model, cls)
        assert not result.holds


class TestEigenstateSupports:
    def test_point_preparation_support(self, spin_model):
        cls = QuantityClass("Q", ("Mz",))
        support, names = operational_eigenstate_supports(spin_model, cls, PLUS)
        assert support == frozenset({"z0"})
        assert names == ("zero",)

    def test_chain_has_one_basis_state_per_value(self):
        build = zoo.build("superselected")
        cls = model_class(build)
        for value, state in ((PLUS, "up"), (MINUS, "down")):
            support, _ = operational_eigenstate_supports(build.model, cls, value)
            assert support == frozenset({state})

    def test_sphere_supports_are_hemispheres(self):
        arr = zoo.build_ks_arrangement(500, 1.0, 1.0)
        cls = QuantityClass.verified(arr.model, "Q", ["Mz"])
        support, names = operational_eigenstate_supports(arr.model, cls, PLUS)
        assert "up" in names
        assert support == arr.model.preparations["up"].support()


class TestClassify:
    def test_superselected_is_mixture_macrorealist(self):
        build = zoo.build("superselected")
        result = classify(build.model, model_class(build))
        assert result.verdict == "MR1"
        mixed = next(e for e in result.evidence if e.name == "prep-mixed")
        assert mixed.hull_residual <= 1e-10
        assert mixed.hull_weights["prep-up"] == pytest.approx(0.5, abs=1e-8)

    def test_sphere_is_support_macrorealist(self):
        arr = zoo.build_ks_arrangement(800, 1.0, 1.0)
        result = classify(arr.model, QuantityClass.verified(arr.model, "Q", ["Mz"]))
        assert result.verdict == "MR2"
        side = next(e for e in result.evidence if e.name == "side")
        assert not side.mixture_member
        assert side.hull_residual > 1e-3
        assert side.support_contained

    def test_two_path_is_supra_support(self):
        build = zoo.build("bohm-two-path")
        result = classify(build.model, model_class(build))
        assert result.verdict == "MR3"
        superposed = next(e for e in result.evidence if e.name == "superposed")
        assert superposed.novel_states

    def test_qubit_is_not_macrorealist(self):
        build = zoo.build("qubit")
        result = classify(build.model, model_class(build))
        assert result.verdict == "not-MR"

    def test_no_eigenstate_preparation_is_an_error(self):
        space = OnticStateSpace(("a", "b"))
        response = ResponseFunction(
            space,
            (PLUS, MINUS),
            {"a": {PLUS: 1.0, MINUS: 0.0}, "b": {PLUS: 0.0, MINUS: 1.0}},
        )
        model = OnticModel(
            space=space,
            preparations={"blend": Distribution(space, {"a": 0.5, "b": 0.5})},
            transformations={},
            measurements={
                "M": Measurement(
                    "M",
                    response,
                    MeasurementUpdate.noninvasive(space, (PLUS, MINUS), space.states),
                )
            },
        )
        with pytest.raises(ClassificationError):
            classify(model, QuantityClass("Q", ("M",)))

    def test_mixture_membership_implies_support_containment(self):
        for name in ("superselected", "support-mr-minimal", "bohm-two-path"):
            build = zoo.build(name)
            result = classify(build.model, model_class(build))
            for ev in result.evidence:
                if ev.mixture_member:
                    assert ev.support_contained

    def test_value_components_respect_values(self):
        build = zoo.build("support-mr-minimal")
        cls = model_class(build)
        result = classify(build.model, cls)
        md = check_macrodefinite(build.model, cls)
        response = build.model.measurements["look"].response
        for ev in result.evidence:
            for value, comp in ev.value_components.items():
                for state, weight in comp.weights.items():
                    if weight > 0.0:
                        assert md.value_of[state] == value
                        assert response.row(state)[value] == 1.0

    def test_relabeling_invariance(self):
        build = zoo.build("support-mr-minimal")
        renamed = {"x": "s1", "y": "s2", "z": "s3"}
        space = OnticStateSpace(tuple(renamed[s] for s in build.model.space.states))

        def rename_dist(dist):
            return Distribution(space, {renamed[k]: v for k, v in dist.weights.items()})

        look = build.model.measurements["look"]
        model = OnticModel(
            space=space,
            preparations={k: rename_dist(v) for k, v in build.model.preparations.items()},
            transformations={},
            measurements={
                "look": Measurement(
                    "look",
                    ResponseFunction(
                        space,
                        look.outcomes,
                        {renamed[s]: dict(row) for s, row in look.response.table.items()},
                    ),
                    MeasurementUpdate(
                        space,
                        look.outcomes,
                        outcome_rows={
                            q: rename_dist(d) for q, d in look.update.outcome_rows.items()
                        },
                    ),
                )
            },
        )
        result = classify(model, QuantityClass.verified(model, "Q", ["look"]))
        assert result.verdict == "MR2"

    def test_transformation_images_can_join_the_classified_set(self):
        build = zoo.build("superselected")
        result = classify(build.model, model_class(build), image_depth=2)
        assert result.verdict == "MR1"
        assert any(">" in name for name in result.classified_preparations)

    def test_preparation_order_is_irrelevant(self):
        build = zoo.build("support-mr-minimal")
        shuffled = OnticModel(
            space=build.model.space,
            preparations=dict(reversed(list(build.model.preparations.items()))),
            transformations={},
            measurements=dict(build.model.measurements),
            metadata=dict(build.model.metadata),
        )
        cls = QuantityClass.verified(shuffled, "Q", ["look"])
        assert classify(shuffled, cls).verdict == "MR2"


class TestEquilibrium:
    def test_identity_update_is_fixed_point(self):
        build = zoo.build("superselected")
        result = check_equilibrium_property(build.model, model_class(build), "read")
        assert result.holds

    def test_resampling_update_preserves_eigen_density(self):
        arr = zoo.build_ks_arrangement(500, 1.0, 1.0)
        cls = QuantityClass.verified(arr.model, "Q", ["Mz"])
        result = check_equilibrium_property(arr.model, cls, "Mz")
        assert result.holds
        assert result.worst_deviation <= 1e-12

    def test_drifting_update_detected(self):
        build = zoo.build("drifting-update")
        result = check_equilibrium_property(build.model, model_class(build), "swapper")
        assert not result.holds
