"""JSON encodings shared by the command-line tool.

Complex numbers are ``[re, im]``, matrices are four complex entries in
row-major order, and divisor points are ``[re, im]`` or the string ``"inf"``.
"""
from __future__ import annotations

import json

import numpy as np

from .algebra2 import cmat2
from .continuation import NumericMonodromy
from .equation import ExponentTable, HypergeometricParams, RiemannEquation, build_equation
from .realize import RealizationWitness, VerificationReport
from .representation import DEFAULT_DIVISOR, INF, Divisor, MonodromyRep, RealizabilityVerdict, is_infinite, make_rep, rep_from_triple
from .sl2z import FamilyMember, Sl2zVerdict


class SchemaError(ValueError):
    """Input that does not match the expected JSON layout."""


def _real(x: float) -> float:
    # avoid "-0.0" in output
    return float(x) + 0.0


def enc_complex(z) -> list[float]:
    z = complex(z)
    return [_real(z.real), _real(z.imag)]


def dec_complex(v) -> complex:
    if isinstance(v, bool):
        raise SchemaError(f"expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError as exc:
            raise SchemaError(f"bad complex literal {v!r}") from exc
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise SchemaError(f"expected [re, im], got {v!r}")


def enc_matrix(m) -> list[list[float]]:
    m = np.asarray(m)
    return [enc_complex(x) for x in m.reshape(-1)]


def dec_matrix(v) -> np.ndarray:
    """Four entries in row-major order, or two rows of two entries."""
    if not isinstance(v, (list, tuple)):
        raise SchemaError("a matrix is a list of four entries or two rows")
    flat = list(v)
    if len(flat) == 2:
        if not all(isinstance(r, (list, tuple)) and len(r) == 2 for r in flat):
            raise SchemaError("a matrix given by rows needs two rows of two entries")
        flat = [x for r in flat for x in r]
    if len(flat) != 4:
        raise SchemaError("a matrix has four entries")
    try:
        return cmat2([dec_complex(x) for x in flat])
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def enc_point(p) -> list[float] | str:
    return "inf" if is_infinite(complex(p)) else enc_complex(p)


def dec_point(v) -> complex:
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity", "∞"):
        return INF
    return dec_complex(v)


def enc_divisor(d: Divisor) -> list:
    return [enc_point(p) for p in d]


def dec_divisor(v) -> Divisor:
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise SchemaError("a divisor is a list of three points")
    try:
        return Divisor(tuple(dec_point(p) for p in v))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def _require(doc, key):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"missing field {key!r}")
    return doc[key]


def enc_rep(rep: MonodromyRep) -> dict:
    return {"divisor": enc_divisor(rep.divisor), "G1": enc_matrix(rep.G1),
            "G2": enc_matrix(rep.G2), "G3": enc_matrix(rep.G3)}


def dec_rep(doc) -> MonodromyRep:
    divisor = dec_divisor(doc["divisor"]) if isinstance(doc, dict) and "divisor" in doc else DEFAULT_DIVISOR
    g1 = dec_matrix(_require(doc, "G1"))
    g2 = dec_matrix(_require(doc, "G2"))
    try:
        if doc.get("G3") is not None:
            return rep_from_triple(g1, g2, dec_matrix(doc["G3"]), divisor)
        return make_rep(g1, g2, divisor)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def enc_exponents(t: ExponentTable) -> list:
    return [[enc_complex(b1), enc_complex(b2)] for b1, b2 in t.beta]


def dec_exponents(v) -> ExponentTable:
    if not isinstance(v, (list, tuple)) or len(v) != 3 or any(
            not isinstance(r, (list, tuple)) or len(r) != 2 for r in v):
        raise SchemaError("exponents are three pairs")
    return ExponentTable(tuple((dec_complex(a), dec_complex(b)) for a, b in v))


def enc_equation(eq: RiemannEquation) -> dict:
    fin = eq.divisor.finite_indices
    return {
        "divisor": enc_divisor(eq.divisor),
        "exponents": enc_exponents(eq.exponents),
        "resonant": eq.resonant,
        "form": eq.form,
        # derived, informational: p = sum P/(z-a), q = sum A/(z-a)^2 + B/(z-a)
        "coefficients": {
            "P": [enc_complex(eq.P[i]) for i in fin],
            "A": [enc_complex(eq.A[i]) for i in fin],
            "B": [enc_complex(eq.B[i]) for i in fin],
        },
    }


def dec_equation(doc) -> RiemannEquation:
    divisor = dec_divisor(_require(doc, "divisor"))
    table = dec_exponents(_require(doc, "exponents"))
    try:
        return build_equation(divisor, table)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def enc_hyp(h: HypergeometricParams) -> dict:
    return {"alpha": enc_complex(h.alpha), "beta": enc_complex(h.beta), "gamma": enc_complex(h.gamma)}


def enc_verdict(v: RealizabilityVerdict) -> dict:
    return {"theorem": v.theorem.value, "reason": v.detail}


def enc_witness(w: RealizationWitness) -> dict:
    if w.refusal is not None:
        return {"refusal": enc_verdict(w.refusal)}
    if not w.found:
        return {"unresolved": w.unresolved, "candidates_tried": w.candidates_tried}
    return {"equation": enc_equation(w.equation), "conjugator": enc_matrix(w.conjugator),
            "residual": w.residual, "candidates_tried": w.candidates_tried}


def enc_report(r: VerificationReport) -> dict:
    return {"ok": r.ok, "residual": r.residual, "tol": r.tol, "trace_gap": r.trace_gap,
            "conjugator": None if r.conjugator is None else enc_matrix(r.conjugator)}


def enc_monodromy(m: NumericMonodromy) -> dict:
    out = {
        "divisor": enc_divisor(m.plan.divisor),
        "G1": enc_matrix(m.G[0]), "G2": enc_matrix(m.G[1]), "G3": enc_matrix(m.G[2]),
        "residual": m.residual, "tol": m.tol_used, "steps": m.steps,
        "base": enc_complex(m.plan.base),
        "derived": None if m.derived_index is None else m.derived_index + 1,
    }
    if m.infinity_mismatch is not None:
        out["infinity_mismatch"] = m.infinity_mismatch
    return out


def enc_sl2z(v: Sl2zVerdict) -> dict:
    return {"in_sl2c": v.in_sl2c, "in_sl2z": v.in_sl2z, "k": v.k, "b": enc_complex(v.b),
            "k_distance": v.k_distance,
            "conjugator": None if v.conjugator is None else enc_matrix(v.conjugator)}


def enc_member(m: FamilyMember) -> dict:
    return {"k": m.k, "l": m.l, **enc_hyp(m.params), "equation": enc_equation(m.equation)}


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)
