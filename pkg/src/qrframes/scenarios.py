"""Wigner's friend workflows and JSON scenario execution."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import DimensionError, QRFError, ScenarioError
from .groups import build_group
from .hilbert import (
    DENSE_CAP,
    Encoded,
    QuantumState,
    Regular,
    amplitude_distance,
    basis_state,
    build_encoding,
    dimension,
    from_dense,
    normalize,
    product_state,
    schmidt_rank,
    state_distance,
    superpose,
    to_dense,
)
from .irreversible import build_dense_irreversible, build_dense_truncation, change_frame_irreversible, truncate_state
from .report import sig
from .reversible import ObservableMatrix, build_dense_operator, change_frame, transform_observable

UP, DOWN = 0, 1


# -- Wigner's friend -------------------------------------------------------------

@dataclass(frozen=True)
class WignerResult:
    initial: QuantumState
    post_measurement: QuantumState
    inferred_by_friend: QuantumState
    projection_branches: tuple[tuple[float, QuantumState], ...]
    consistency_verdict: dict
    names: tuple[str, ...]
    oracle_residual: float

    def to_dict(self) -> dict:
        return {
            "systems": list(self.names),
            "initial": state_to_dict(self.initial, self.names),
            "post_measurement": state_to_dict(self.post_measurement, self.names),
            "inferred_by_friend": state_to_dict(self.inferred_by_friend, self.names),
            "projection_branches": [
                {"probability": sig(p, 12), "state": state_to_dict(s, self.names)}
                for p, s in self.projection_branches
            ],
            "consistency_verdict": self.consistency_verdict,
            "oracle_residual": sig(self.oracle_residual, 3),
        }


def _measure(psi: QuantumState, friend: int, system: int) -> QuantumState:
    """Record the system's value in the friend: ``|f, s⟩ ↦ |f ⊕ s, s⟩``."""
    out = {}
    for labels, amp in psi.terms.items():
        new = list(labels)
        new[friend] = labels[friend] ^ labels[system]
        out[tuple(new)] = amp
    return QuantumState(psi.frame, psi.models, out, psi.meta)


def run_wigner(alpha: complex, beta: complex, with_reference: bool = False, tol: float = 1e-10) -> WignerResult:
    """Wigner (frame) describes the friend measuring a qubit, then changes to the friend's frame.

    The result also holds the two states the friend would assign after a
    projective measurement, and a comparison between those and the inferred
    state.
    """
    alpha, beta = complex(alpha), complex(beta)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > tol:
        raise ValueError("(alpha, beta) must be normalized")
    Z2 = build_group("Z:2")
    names = ("W", "R", "F", "S") if with_reference else ("W", "F", "S")
    models = tuple(Regular(Z2) for _ in names)
    friend, system = names.index("F"), names.index("S")

    def ket(**labels):
        return tuple(labels.get(n, UP) for n in names)

    initial = superpose(
        [alpha, beta],
        [basis_state(models, 0, ket(S=UP)), basis_state(models, 0, ket(S=DOWN))],
    )
    post = _measure(initial, friend, system)
    inferred = change_frame(post, friend)
    dense = build_dense_operator(models, 0, friend).apply(post, friend)
    oracle = amplitude_distance(inferred, dense)

    branches = []
    for p, s in ((abs(alpha) ** 2, UP), (abs(beta) ** 2, DOWN)):
        branches.append((p, basis_state(models, friend, ket(S=s))))

    s_fixed = all(lab[system] == UP for lab in inferred.terms)
    distances = {key: state_distance(inferred, st) for key, (_, st) in zip(("up", "down"), branches)}
    equals = {k: d < tol for k, d in distances.items()}
    verdict = {
        "s_slot_fixed_up": s_fixed,
        "s_factorizes": schmidt_rank(inferred, [system]) == 1,
        "branch_distances": {k: sig(v, 6) for k, v in distances.items()},
        "inferred_equals_branch": equals,
        "consistent_with_projection": any(equals.values()),
    }
    if with_reference:
        verdict["wigner_reference_schmidt_rank"] = schmidt_rank(inferred, [names.index("W")])
    verdict["summary"] = (
        "inferred state coincides with a projection branch"
        if verdict["consistent_with_projection"]
        else "inferred state differs from every projection branch"
    )
    return WignerResult(initial, post, inferred, tuple(branches), verdict, names, oracle)


# -- serialization ---------------------------------------------------------------

def _amp(z: complex) -> list[float]:
    return [sig(z.real, 12), sig(z.imag, 12)]


def state_to_dict(psi: QuantumState, names=None) -> dict:
    names = list(names) if names is not None else [str(k) for k in range(psi.size)]
    out: dict[str, Any] = {
        "frame": names[psi.frame],
        "systems": names,
        "models": [m.describe() for m in psi.models],
        "terms": [{"labels": list(k), "amp": _amp(a)} for k, a in psi.terms.items()],
        "norm": sig(psi.norm, 12),
    }
    meta = {k: (sig(v, 12) if isinstance(v, float) else v) for k, v in psi.meta.items()}
    if meta:
        out["meta"] = meta
    return out


# -- scenario files ----------------------------------------------------------------

_AMP = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_NAMES = {"type": "array", "items": {"type": "string"}}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema", "group", "systems", "state"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": 1},
        "description": {"type": "string"},
        "group": {"type": "string"},
        "systems": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "kind": {"enum": ["G", "N"]},
                    "model": {"type": "string"},
                },
            },
        },
        "state": {
            "type": "object",
            "required": ["frame", "terms"],
            "additionalProperties": False,
            "properties": {
                "frame": {"type": "string"},
                "terms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["amp"],
                        "additionalProperties": False,
                        "properties": {
                            "labels": {"type": "array", "items": {"type": ["integer", "string"]}},
                            "elements": {"type": "array", "items": {"type": ["integer", "string"]}},
                            "amp": _AMP,
                        },
                        "oneOf": [{"required": ["labels"]}, {"required": ["elements"]}],
                    },
                },
            },
        },
        "pipeline": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["op"],
                "properties": {
                    "op": {"enum": ["change_frame", "truncate", "irreversible_change", "schmidt_rank", "observable"]},
                    "to": {"type": "string"},
                    "slots": _NAMES,
                    "left": _NAMES,
                    "tol": {"type": "number", "exclusiveMinimum": 0},
                    "projector": {
                        "type": "object",
                        "required": ["system", "label"],
                        "properties": {"system": {"type": "string"}, "label": {"type": ["integer", "string"]}},
                    },
                },
                "allOf": [
                    {"if": {"properties": {"op": {"enum": ["change_frame", "irreversible_change"]}}},
                     "then": {"required": ["to"]}},
                    {"if": {"properties": {"op": {"const": "schmidt_rank"}}}, "then": {"required": ["left"]}},
                    {"if": {"properties": {"op": {"const": "observable"}}}, "then": {"required": ["projector", "to"]}},
                ],
            },
        },
    },
}


@dataclass
class Scenario:
    data: dict
    names: tuple[str, ...]
    state: QuantumState
    pipeline: list[dict]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ScenarioError(f"unknown system {name!r}") from None


def parse_scenario_text(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"schema error at {where}: {exc.message}") from None
    return data


def _complex(amp) -> complex:
    return complex(amp[0], amp[1]) if isinstance(amp, list) else complex(amp)


def build_scenario(data: dict) -> Scenario:
    try:
        G = build_group(data["group"])
        names = tuple(s["name"] for s in data["systems"])
        if len(set(names)) != len(names):
            raise ScenarioError("system names must be distinct")
        models = []
        for s in data["systems"]:
            spec = s.get("model", "regular")
            if spec == "regular":
                models.append(Regular(G, s.get("kind", "G")))
            else:
                enc = build_encoding(spec)
                if enc.group.order != G.order or not np.array_equal(enc.group.cayley, G.cayley):
                    raise ScenarioError(f"encoding {spec!r} is not over the scenario group")
                if s.get("kind", "G") != "G":
                    raise ScenarioError("encoded systems cannot be N-systems")
                models.append(_rebase(enc, G))
        models = tuple(models)
        st = data["state"]
        if st["frame"] not in names:
            raise ScenarioError(f"unknown frame system {st['frame']!r}")
        frame = names.index(st["frame"])
        parts = []
        for term in st["terms"]:
            key = "labels" if "labels" in term else "elements"
            raw = term[key]
            if len(raw) != len(models):
                raise ScenarioError(f"term {raw} does not list one entry per system")
            factors = []
            for m, x in zip(models, raw):
                if isinstance(m, Encoded) and key == "elements":
                    factors.append(m.injection[G.index(x)])
                elif isinstance(m, Encoded):
                    if not isinstance(x, int):
                        raise ScenarioError("encoded slots take integer computational labels")
                    factors.append(x)
                else:
                    factors.append(G.index(x))
            parts.append(product_state(models, frame, factors))
        state = superpose([_complex(t["amp"]) for t in st["terms"]], parts)
    except ScenarioError:
        raise
    except (QRFError, IndexError) as exc:
        raise ScenarioError(str(exc)) from None
    return Scenario(data, names, state, list(data.get("pipeline", [])))


def _rebase(enc: Encoded, G) -> Encoded:
    if enc.group == G:
        return enc
    return Encoded(G, enc.injection, enc.v_right_table, enc.v_left_table, name=enc.name)


def _oracle_ok(models) -> bool:
    return dimension(models) <= DENSE_CAP


def _run_step(sc: Scenario, psi: QuantumState, step: dict, tol: float) -> tuple[QuantumState, dict]:
    op = step["op"]
    rec: dict[str, Any] = {"op": op}
    residual = None
    if op == "change_frame":
        j = sc.index(step["to"])
        out = change_frame(psi, j)
        if _oracle_ok(psi.models):
            residual = amplitude_distance(out, build_dense_operator(psi.models, psi.frame, j).apply(psi, j))
        rec["to"] = step["to"]
    elif op == "truncate":
        slots = [sc.index(n) for n in step.get("slots", sc.names)]
        out = truncate_state(psi, slots)
        if _oracle_ok(psi.models):
            vec = build_dense_truncation(psi.models, slots) @ to_dense(psi)
            residual = amplitude_distance(out, from_dense(psi.models, psi.frame, vec))
        rec["slots"] = [sc.names[k] for k in slots]
        rec["norm"] = sig(out.norm, 12)
    elif op == "irreversible_change":
        j = sc.index(step["to"])
        out = change_frame_irreversible(psi, j)
        if _oracle_ok(psi.models):
            vec = build_dense_irreversible(psi.models, psi.frame, j) @ to_dense(psi)
            residual = amplitude_distance(out, normalize(from_dense(psi.models, j, vec)))
        rec["to"] = step["to"]
        rec["norm_factor"] = sig(out.meta["norm_factor"], 12)
    elif op == "schmidt_rank":
        left = [sc.index(n) for n in step["left"]]
        out = psi
        rec["left"] = list(step["left"])
        rec["rank"] = schmidt_rank(psi, left, step.get("tol", tol))
    elif op == "observable":
        if not _oracle_ok(psi.models):
            raise DimensionError("observable transforms need the dense operator")
        slot = sc.index(step["projector"]["system"])
        model = psi.models[slot]
        label = step["projector"]["label"]
        label = model.group.index(label) if isinstance(model, Regular) else int(label)
        proj = np.zeros((model.dim, model.dim))
        proj[label, label] = 1.0
        mat = np.ones((1, 1))
        for k, m in enumerate(psi.models):
            mat = np.kron(mat, proj if k == slot else np.eye(m.dim))
        Z = ObservableMatrix(mat, psi.models)
        j = sc.index(step["to"])
        Zj = transform_observable(Z, psi.frame, j)
        moved = change_frame(psi, j)
        before, after = Z.expectation(psi), Zj.expectation(moved)
        spectrum = float(np.max(np.abs(np.linalg.eigvalsh(Z.matrix) - np.linalg.eigvalsh(Zj.matrix))))
        residual = max(abs(before - after), spectrum)
        rec.update(to=step["to"], projector=step["projector"], expectation=sig(before, 12),
                   expectation_transformed=sig(after, 12))
        out = psi
    else:  # pragma: no cover - schema restricts op
        raise ScenarioError(f"unknown op {op!r}")
    if residual is not None:
        rec["residual"] = sig(residual, 3)
        rec["passed"] = residual < tol
    return out, rec


def run_scenario_data(data: dict, tol: float = 1e-10, pipeline: list[dict] | None = None) -> dict:
    sc = build_scenario(data)
    steps = sc.pipeline if pipeline is None else pipeline
    psi = sc.state
    records = []
    for k, step in enumerate(steps):
        try:
            psi, rec = _run_step(sc, psi, step, tol)
        except ScenarioError:
            raise
        except (QRFError, IndexError) as exc:
            raise ScenarioError(f"pipeline step {k} ({step['op']}): {exc}") from None
        records.append(rec)
    return {
        "schema": 1,
        "input": data,
        "steps": records,
        "output": state_to_dict(psi, sc.names),
        "norm_factor": sig(float(psi.meta.get("norm_factor", 1.0)), 12),
        "tolerance": tol,
        "passed": all(r.get("passed", True) for r in records),
    }


def run_scenario(path, tol: float = 1e-10, pipeline: list[dict] | None = None) -> dict:
    """Load, validate and execute a scenario file; returns the report as a dict."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    return run_scenario_data(parse_scenario_text(text), tol, pipeline)


def dump_report(report: dict, pretty: bool = False) -> str:
    return json.dumps(report, sort_keys=True, indent=2 if pretty else None, ensure_ascii=False) + "\n"


__all__ = [
    "SCENARIO_SCHEMA",
    "Scenario",
    "WignerResult",
    "build_scenario",
    "dump_report",
    "parse_scenario_text",
    "run_scenario",
    "run_scenario_data",
    "run_wigner",
    "state_to_dict",
]
