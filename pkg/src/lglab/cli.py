"""Batch front door: load models, run analyses, emit reports and sweeps.

Exit codes: 0 on success, 2 on input or validation errors, 3 when an
exact internal identity is violated (an engine-defect signal, never a
property of a valid input).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import pickle
import sys
from datetime import datetime, timezone

from . import __version__
from .classify import HULL_TOL, QuantityClass, check_equilibrium_property, classify
from .core import NORMALIZATION_TOL, SUPPORT_TOL
from .errors import EngineDefectError, LglabError, SchemaError
from .lg import (
    RESIDUAL_TOL,
    check_implication_chain,
    disturbance_report,
)
from .operational import EQUIVALENCE_TOL, expectation, marginalize, run_protocol
from . import schema, twoslit, zoo

#: A decomposition residual above this gate makes the lg command exit 3.
RESIDUAL_GATE = 1e-10


def _timestamp():
    return datetime.now(timezone.utc).isoformat()


def _report_skeleton(command, args, inputs):
    report = {
        "tool": "lglab",
        "version": __version__,
        "command": command,
    }
    if not args.no_timestamp:
        report["timestamp"] = _timestamp()
    report["tolerances"] = {
        "normalization": NORMALIZATION_TOL,
        "support": SUPPORT_TOL,
        "equivalence": args.tol,
        "hull": HULL_TOL,
        "decomposition_residual": RESIDUAL_TOL,
        "residual_gate": RESIDUAL_GATE,
    }
    report["inputs"] = inputs
    return report


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _emit_report(args, report):
    _emit(args, json.dumps(report, indent=2) + "\n")


def _zoo_params(args):
    params = {}
    for key in ("theta1", "theta2", "p1", "p2"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if getattr(args, "grid", None) is not None:
        params["n_points"] = args.grid
    return params


def _build_zoo(name, params):
    cache_dir = os.environ.get("LGLAB_ZOO_CACHE")
    if not cache_dir:
        return zoo.build(name, **params)
    key = json.dumps({"name": name, "params": params, "version": __version__}, sort_keys=True)
    digest = hashlib.sha256(key.encode()).hexdigest()[:24]
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"{name}-{digest}.pkl")
    if os.path.exists(path):
        with open(path, "rb") as handle:
            return pickle.load(handle)
    built = zoo.build(name, **params)
    with open(path, "wb") as handle:
        pickle.dump(built, handle)
    return built


def _resolve_arrangement(args):
    """(arrangement, inputs-echo) from either --zoo or --model/--arrangement."""
    if args.zoo:
        params = _zoo_params(args)
        built = _build_zoo(args.zoo, params)
        if built.arrangement is None:
            raise SchemaError(f"zoo model {args.zoo!r} ships no arrangement")
        inputs = {"zoo": args.zoo, "parameters": params or "defaults"}
        return built.arrangement, inputs
    if not args.model:
        raise SchemaError("either --zoo or --model is required")
    model, protocols, arrangements = schema.load_model_file(args.model)
    name = args.arrangement
    if name is None:
        if len(arrangements) != 1:
            raise SchemaError(
                f"model file declares {sorted(arrangements)}; pick one with --arrangement"
            )
        name = next(iter(arrangements))
    if name not in arrangements:
        raise SchemaError(f"unknown arrangement {name!r}; file has {sorted(arrangements)}")
    return arrangements[name], {"model": args.model, "arrangement": name}


def _resolve_model(args):
    if args.zoo:
        params = _zoo_params(args)
        built = _build_zoo(args.zoo, params)
        return built.model, {"zoo": args.zoo, "parameters": params or "defaults"}
    if not args.model:
        raise SchemaError("either --zoo or --model is required")
    model, _, _ = schema.load_model_file(args.model)
    return model, {"model": args.model}


def _pair_key(pair):
    return f"{pair[0]},{pair[1]}"


def cmd_run(args) -> int:
    model, protocols, _ = schema.load_model_file(args.model)
    if args.protocol not in protocols:
        raise SchemaError(f"unknown protocol {args.protocol!r}; file has {sorted(protocols)}")
    joint = run_protocol(model, protocols[args.protocol])
    results = {
        "axes": [{"measurement": m, "outcomes": list(o)} for m, o in joint.axes],
        "joint": [
            {"outcomes": list(combo), "p": p} for combo, p in joint.table.items()
        ],
    }
    for keep in args.marginal or []:
        axes = [a.strip() for a in keep.split(",") if a.strip()]
        marg = marginalize(joint, [int(a) if a.isdigit() else a for a in axes])
        results.setdefault("marginals", {})[keep] = [
            {"outcomes": list(combo), "p": p} for combo, p in marg.table.items()
        ]
    report = _report_skeleton("run", args, {"model": args.model, "protocol": args.protocol})
    report["results"] = results
    _emit_report(args, report)
    return 0


def cmd_lg(args) -> int:
    arrangement, inputs = _resolve_arrangement(args)
    report_obj = disturbance_report(arrangement)
    chain = check_implication_chain(arrangement, depth=args.depth, tol=args.tol)
    results = {
        "lg_all_three": report_obj.lg_all_three,
        "lg_pairwise": report_obj.lg_pairwise,
        "disturbance": {
            "d1": {_pair_key(k): v for k, v in report_obj.d1.items()},
            "d2": {_pair_key(k): v for k, v in report_obj.d2.items()},
            "d3": {_pair_key(k): v for k, v in report_obj.d3.items()},
            "max_abs_d1_d2": report_obj.max_disturbance(),
        },
        "decomposition_residual": report_obj.decomposition_residual,
        "chain": {
            "ontically_noninvasive": chain.ontically_noninvasive,
            "opnd_complete": chain.opnd_complete,
            "opnd_specific": chain.opnd_specific,
            "lgi_satisfied": chain.lgi_satisfied,
            "suffix_depth": args.depth,
        },
    }
    report = _report_skeleton("lg", args, inputs)
    report["results"] = results
    _emit_report(args, report)
    if abs(report_obj.decomposition_residual) > RESIDUAL_GATE:
        print(
            f"error: decomposition residual {report_obj.decomposition_residual!r} "
            f"exceeds gate {RESIDUAL_GATE}",
            file=sys.stderr,
        )
        return 3
    return 0


def _classification_doc(result):
    doc = {
        "quantity_class": result.quantity_class,
        "verdict": result.verdict,
        "macrodefinite": result.macrodefinite,
        "hull_tol": result.hull_tol,
    }
    if not result.macrodefinite:
        witnesses = list(result.macrodefinite_witnesses)
        doc["macrodefinite_witnesses"] = [
            {"state": str(s), "measurement": m, "detail": d} for s, m, d in witnesses[:20]
        ]
        doc["macrodefinite_witness_count"] = len(witnesses)
        return doc
    doc["eigenstate_preparations"] = {
        str(q): list(names) for q, names in result.eigenstate_preparations.items()
    }
    if result.values_without_eigenstate:
        doc["values_without_eigenstate"] = [str(q) for q in result.values_without_eigenstate]
    evidence = []
    for ev in result.evidence:
        entry = {
            "preparation": ev.name,
            "hull_residual": ev.hull_residual,
            "hull_weights": ev.hull_weights,
            "mixture_member": ev.mixture_member,
            "support_contained": ev.support_contained,
            "value_weights": {str(q): w for q, w in ev.value_weights.items()},
        }
        novel = [str(s) for s in ev.novel_states]
        if novel:
            entry["novel_states"] = novel[:50]
            entry["novel_state_count"] = len(novel)
        entry["value_components"] = {
            str(q): (
                {str(k): v for k, v in comp.weights.items()}
                if len(comp.weights) <= 64
                else {"support_size": len(comp.weights)}
            )
            for q, comp in ev.value_components.items()
        }
        evidence.append(entry)
    doc["evidence"] = evidence
    if result.skipped_images:
        doc["skipped_images"] = list(result.skipped_images)
    return doc


def cmd_classify(args) -> int:
    model, inputs = _resolve_model(args)
    declared = model.metadata.get("quantity_classes", {})
    label = args.quantity_class
    if label is None:
        if len(declared) != 1:
            raise SchemaError(
                f"model declares classes {sorted(declared)}; pick one with --class"
            )
        label = next(iter(declared))
    if label not in declared:
        raise SchemaError(f"unknown quantity class {label!r}; model has {sorted(declared)}")
    cls = QuantityClass.verified(model, label, declared[label], tol=args.tol)
    result = classify(model, cls, image_depth=args.image_depth)
    doc = _classification_doc(result)
    if result.macrodefinite:
        equilibrium = {
            m: check_equilibrium_property(model, cls, m).holds for m in cls.measurements
        }
        doc["eigenstate_fixed_point"] = equilibrium
    inputs["class"] = label
    report = _report_skeleton("classify", args, inputs)
    report["results"] = doc
    _emit_report(args, report)
    return 0


def _fmt(value) -> str:
    return f"{value:.12g}"


def cmd_twoslit(args) -> int:
    if args.sweep:
        mods = [(i + 1) / (args.mod_steps + 1) for i in range(args.mod_steps)]
        phis = [2.0 * math.pi * i / args.phi_steps for i in range(args.phi_steps)]
        rows = twoslit.violation_map(mods, phis)
        if args.format == "csv":
            lines = [",".join(twoslit.CSV_COLUMNS)]
            for r in rows:
                lines.append(
                    ",".join(
                        (
                            _fmt(r.mod1_sq),
                            _fmt(r.phi),
                            _fmt(r.lg_plus),
                            _fmt(r.lg_plus_mirrored),
                            "1" if r.violated else "0",
                        )
                    )
                )
            _emit(args, "\n".join(lines) + "\n")
            return 0
        report = _report_skeleton(
            "twoslit", args, {"sweep": {"mod_steps": args.mod_steps, "phi_steps": args.phi_steps}}
        )
        report["results"] = {
            "columns": list(twoslit.CSV_COLUMNS),
            "rows": [
                [r.mod1_sq, r.phi, r.lg_plus, r.lg_plus_mirrored, r.violated] for r in rows
            ],
        }
        _emit_report(args, report)
        return 0

    if args.mod1_sq is None or args.phi is None:
        raise SchemaError("point mode needs --mod1-sq and --phi (or use --sweep)")
    phi = args.phi
    if not 0.0 <= phi < 2.0 * math.pi:
        phi = phi % (2.0 * math.pi)
        print(f"warning: phase folded into [0, 2*pi) as {phi!r}", file=sys.stderr)
    amplitudes = twoslit.SlitAmplitudes.from_intensity_phase(args.mod1_sq, phi)
    both, blocked1, blocked2 = twoslit.detection_probabilities(amplitudes)
    engine = disturbance_report(twoslit.compile_to_arrangement(amplitudes))
    closed_lg = twoslit.lg_plus_value(amplitudes)
    closed_d2 = twoslit.disturbance_d2(amplitudes)
    report = _report_skeleton("twoslit", args, {"mod1_sq": args.mod1_sq, "phi": phi})
    report["results"] = {
        "detection": {"both_open": both, "slit1_blocked": blocked1, "slit2_blocked": blocked2},
        "interference_term": twoslit.interference_term(amplitudes),
        "lg_plus": closed_lg,
        "lg_plus_mirrored": twoslit.lg_plus_mirrored(amplitudes),
        "d2_plus_plus": closed_d2,
        "violated": closed_lg < -1.0,
        "violation_condition_cos_phi": twoslit.violation_condition(amplitudes),
        "engine_cross_check": {
            "lg_pairwise": engine.lg_pairwise,
            "d2_plus_plus": engine.d2[(1, 1)],
            "max_gap": max(
                abs(engine.lg_pairwise - closed_lg), abs(engine.d2[(1, 1)] - closed_d2)
            ),
        },
    }
    _emit_report(args, report)
    return 0


def cmd_zoo(args) -> int:
    if args.action == "list":
        report = _report_skeleton("zoo", args, {"action": "list"})
        report["results"] = {
            "models": [{"name": n, "description": d} for n, d in zoo.list_models()]
        }
        _emit_report(args, report)
        return 0
    params = _zoo_params(args)
    built = _build_zoo(args.name, params)
    arrangements = {}
    protocols = {}
    if built.arrangement is not None:
        arrangements["lg"] = built.arrangement
        masks = {
            "lg-all": (True, True, True),
            "lg-12": (True, True, False),
            "lg-13": (True, False, True),
            "lg-23": (False, True, True),
        }
        template = built.arrangement.protocol()
        protocols = {name: template.with_mask(mask) for name, mask in masks.items()}
    doc = schema.model_to_doc(
        built.model, name=built.name, arrangements=arrangements, protocols=protocols
    )
    _emit(args, json.dumps(doc, indent=2) + "\n")
    return 0


def _add_common(parser):
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp for byte-identical reruns")
    parser.add_argument("--tol", type=float, default=EQUIVALENCE_TOL,
                        help="statistical-agreement tolerance")
    parser.add_argument("--depth", type=int, default=2,
                        help="suffix depth bound for complete non-disturbance")


def _add_zoo_params(parser):
    parser.add_argument("--theta1", type=float, help="first rotation angle (radians)")
    parser.add_argument("--theta2", type=float, help="second rotation angle (radians)")
    parser.add_argument("--p1", type=float, help="first flip probability")
    parser.add_argument("--p2", type=float, help="second flip probability")
    parser.add_argument("--grid", type=int, help="sphere grid size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lglab",
        description="Exact sequential-measurement statistics on finite ontic models",
    )
    parser.add_argument("--version", action="version", version=f"lglab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a protocol from a model file")
    p_run.add_argument("--model", required=True)
    p_run.add_argument("--protocol", required=True)
    p_run.add_argument("--marginal", action="append",
                       help="comma-separated axes to marginalize onto (repeatable)")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_lg = sub.add_parser("lg", help="three-time values, disturbance tables, chain record")
    p_lg.add_argument("--zoo", help="zoo model name")
    p_lg.add_argument("--model", help="model file")
    p_lg.add_argument("--arrangement", help="arrangement name within the model file")
    _add_zoo_params(p_lg)
    _add_common(p_lg)
    p_lg.set_defaults(fn=cmd_lg)

    p_cls = sub.add_parser("classify", help="macrorealism taxonomy verdict")
    p_cls.add_argument("--zoo", help="zoo model name")
    p_cls.add_argument("--model", help="model file")
    p_cls.add_argument("--class", dest="quantity_class", help="declared quantity class")
    p_cls.add_argument("--image-depth", type=int, default=0,
                       help="also classify transformation images up to this depth")
    _add_zoo_params(p_cls)
    _add_common(p_cls)
    p_cls.set_defaults(fn=cmd_classify)

    p_ts = sub.add_parser("twoslit", help="interference closed forms and violation sweep")
    p_ts.add_argument("--mod1-sq", type=float, help="first-slit intensity |a1|^2")
    p_ts.add_argument("--phi", type=float, help="phase difference (radians)")
    p_ts.add_argument("--sweep", action="store_true")
    p_ts.add_argument("--mod-steps", type=int, default=20)
    p_ts.add_argument("--phi-steps", type=int, default=36)
    _add_common(p_ts)
    p_ts.set_defaults(fn=cmd_twoslit)

    p_zoo = sub.add_parser("zoo", help="list built-in models or export one")
    p_zoo.add_argument("action", choices=("list", "export"))
    p_zoo.add_argument("name", nargs="?", help="model to export")
    _add_zoo_params(p_zoo)
    _add_common(p_zoo)
    p_zoo.set_defaults(fn=cmd_zoo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "zoo" and args.action == "export" and not args.name:
        print("error: zoo export needs a model name", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except EngineDefectError as exc:
        print(f"internal identity violated: {exc}", file=sys.stderr)
        return 3
    except json.JSONDecodeError as exc:
        print(f"error: line {exc.lineno}, column {exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    except (LglabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
