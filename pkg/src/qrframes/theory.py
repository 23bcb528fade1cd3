"""Checks tying unitarity of frame changes to orthogonality of the frame's states.

``consistency_probe`` inspects the Gram matrix of an encoding: a linear
frame change can only exist when ``⟨ψ(e)|ψ(d)⟩`` equals its own conjugate
squared for every ``d``, which for distinct unit vectors forces
orthogonality. ``linearity_counterexample`` shows the failure concretely on
the half-angle qubit by fitting the best linear map to the required
input/output pairs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ModelError
from .hilbert import Encoded, Regular, SystemModel
from .report import VerificationReport, sig
from .reversible import build_dense_operator


@dataclass
class ProbeReport:
    model: str
    gram: np.ndarray
    condition_residuals: dict[int, float]
    verdict: str
    witness: int | None = None
    witness_residual: float = 0.0
    equivariance_defect: float = 0.0
    tolerance: float = 1e-10
    hermitian_residual: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "orthonormal-pass"

    def to_dict(self) -> dict:
        def entry(z):
            return [sig(float(z.real), 6), sig(float(z.imag), 6)]

        return {
            "model": self.model,
            "verdict": self.verdict,
            "passed": self.passed,
            "witness": self.witness,
            "witness_residual": sig(self.witness_residual, 3),
            "equivariance_defect": sig(self.equivariance_defect, 3),
            "tolerance": self.tolerance,
            "gram": [[entry(z) for z in row] for row in self.gram],
            "condition_residuals": {str(k): sig(v, 3) for k, v in sorted(self.condition_residuals.items())},
        }


def _injection(model: SystemModel) -> np.ndarray:
    if isinstance(model, Regular):
        return np.eye(model.dim, dtype=complex)
    if isinstance(model, Encoded):
        return np.asarray(model.injection)
    raise ModelError("model must be Regular or Encoded")


def model_name(model: SystemModel) -> str:
    return model.name if isinstance(model, Encoded) else f"regular:{model.group.name}"


def consistency_probe(model: SystemModel, tol: float = 1e-10) -> ProbeReport:
    """Gram matrix, per-element condition residuals and a pass/fail verdict.

    The witness is the first non-identity element (in index order) whose
    condition residual exceeds ``tol``.
    """
    G = model.group
    inj = _injection(model)
    gram = inj.conj() @ inj.T
    e = G.identity
    residuals = {}
    for d in G.elements():
        if d == e:
            continue
        x = gram[e, d]
        residuals[d] = float(abs(x - np.conj(x) ** 2))
    ok = float(np.max(np.abs(gram - np.eye(G.order)))) < tol
    witness = next((d for d, r in residuals.items() if r > tol), None)
    if witness is None and not ok:
        witness = next((d for d in G.elements() if d != e and abs(gram[e, d]) > tol), None)
    defect = 0.0
    for g in G.elements():
        gi = G.inverse(g)
        for h in G.elements():
            defect = max(defect, float(abs(gram[g, h] - gram[e, G.compose(gi, h)])))
    return ProbeReport(
        model=model_name(model),
        gram=gram,
        condition_residuals=residuals,
        verdict="orthonormal-pass" if ok else "fail",
        witness=witness,
        witness_residual=residuals.get(witness, 0.0) if witness is not None else 0.0,
        equivariance_defect=defect,
        tolerance=tol,
        hermitian_residual=float(np.max(np.abs(gram - gram.conj().T))),
    )


def _kron3(a, b, c) -> np.ndarray:
    return np.kron(np.kron(a, b), c)


def _fit(inputs: np.ndarray, outputs: np.ndarray) -> dict:
    """Fit a linear map to column pairs two ways.

    ``spanning``: exact solve on a greedily chosen spanning set, then the
    largest error on the remaining (held-out) columns. ``lstsq``: the
    least-squares map over all columns and its largest per-column error.
    """
    chosen: list[int] = []
    rank = 0
    for k in range(inputs.shape[1]):
        r = np.linalg.matrix_rank(inputs[:, chosen + [k]], tol=1e-9)
        if r > rank:
            chosen.append(k)
            rank = r
    Xs, Ys = inputs[:, chosen], outputs[:, chosen]
    L = Ys @ np.linalg.pinv(Xs)
    held = [k for k in range(inputs.shape[1]) if k not in set(chosen)]
    held_dev = float(np.max(np.linalg.norm(L @ inputs[:, held] - outputs[:, held], axis=0))) if held else 0.0
    L2 = outputs @ np.linalg.pinv(inputs)
    lsq = float(np.max(np.linalg.norm(L2 @ inputs - outputs, axis=0)))
    return {"spanning_set": chosen, "held_out_deviation": held_dev, "lstsq_residual": lsq, "map": L2}


def _literal_state(angle: float) -> np.ndarray:
    return np.array([math.cos(angle / 2), math.sin(angle / 2)])


def linearity_counterexample(m: int, threshold: float = 0.1, tol: float = 1e-10) -> VerificationReport:
    """Try to realize the three-qubit frame change on the ``m``-point half-angle encoding linearly.

    Inputs are ``ψ(a)ψ(b)ψ(c)`` for all ``a, b, c``; required outputs are
    ``ψ(−θ_b)ψ(θ_a)ψ(θ_c − θ_b)`` evaluated at the literal angles, so the sign
    picked up when an angle leaves ``[0, 2π)`` is kept. For ``m ≥ 3`` no linear
    map fits (deviation above ``threshold``); ``m = 2`` is the orthonormal
    case, where the fit is exact.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    theta = [2 * math.pi * k / m for k in range(m)]
    X, Y, triples = [], [], []
    for a, b, c in itertools.product(range(m), repeat=3):
        X.append(_kron3(_literal_state(theta[a]), _literal_state(theta[b]), _literal_state(theta[c])))
        Y.append(_kron3(_literal_state(-theta[b]), _literal_state(theta[a]), _literal_state(theta[c] - theta[b])))
        triples.append((a, b, c))
    X, Y = np.array(X).T, np.array(Y).T
    fit = _fit(X, Y)
    rep = VerificationReport(f"linearity m={m}")
    if m % 2 == 0:
        half = m // 2
        basis = np.eye(8)
        expected = {"000": (basis[0], (0, 0, 0)), "001": (basis[1], (0, 0, half)),
                    "010": (basis[5], (0, half, 0)), "011": (-basis[4], (0, half, half))}
        worst = 0.0
        images = {}
        for key, (want, triple) in expected.items():
            got = Y[:, triples.index(triple)]
            worst = max(worst, float(np.max(np.abs(got - want))))
            images[key] = [sig(float(v), 6) for v in got]
        rep.add_residual("basis_images", worst, tol, images=images)
    detail = {"inputs": len(triples), "spanning_set_size": len(fit["spanning_set"]),
              "lstsq_residual": sig(fit["lstsq_residual"], 3)}
    if m == 2:
        rep.add_residual("exact_linear_fit", max(fit["held_out_deviation"], fit["lstsq_residual"]), tol, **detail)
    else:
        dev = fit["held_out_deviation"]
        rep.add("nonlinear", dev > threshold and fit["lstsq_residual"] > threshold, dev, threshold, **detail)
    rep.checks[-1].detail["held_out_deviation"] = sig(fit["held_out_deviation"], 3)
    return rep


def encoded_frame_fit(model: SystemModel) -> dict:
    """Best linear fit of the frame change when all three systems use ``model``.

    Group labels define the map ``|a,b,c⟩ ↦ |b⁻¹, a, c·b⁻¹⟩`` on injected states.
    """
    G = model.group
    inj = _injection(model)
    X, Y = [], []
    for a, b, c in itertools.product(G.elements(), repeat=3):
        bi = G.inverse(b)
        X.append(_kron3(inj[a], inj[b], inj[c]))
        Y.append(_kron3(inj[bi], inj[a], inj[G.compose(c, bi)]))
    return _fit(np.array(X).T, np.array(Y).T)


def orthonormality_crosscheck(model: Union[Regular, Encoded], tol: float = 1e-10, fit_floor: float = 1e-3) -> VerificationReport:
    """Pair the Gram probe with operator-level evidence.

    A passing probe must come with a unitary mixed frame change (two regular
    frames plus the encoded system) and an exact linear fit; a failing probe
    must come with a linear-fit residual above ``fit_floor``.
    """
    probe = consistency_probe(model, tol)
    fit = encoded_frame_fit(model)
    rep = VerificationReport(f"crosscheck {probe.model}")
    rep.add("probe", True, verdict=probe.verdict, witness=probe.witness)
    if probe.passed:
        models = (Regular(model.group), Regular(model.group), model)
        U = build_dense_operator(models, 0, 1).matrix
        unit = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
        rep.add_residual("mixed_unitarity", unit, tol)
        rep.add_residual("linear_fit", fit["lstsq_residual"], tol)
    else:
        r = fit["lstsq_residual"]
        rep.add("linear_fit_fails", r > fit_floor, r, fit_floor)
    return rep


__all__ = [
    "ProbeReport",
    "consistency_probe",
    "encoded_frame_fit",
    "linearity_counterexample",
    "orthonormality_crosscheck",
]
