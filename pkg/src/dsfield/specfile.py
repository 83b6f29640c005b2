"""Load and save solution specs as INI-style text files.

Schema (all sections required except [funcs] and [signs], which default):

    [coeffs]                a0..a3 as floats
    [p] / [q]               family = expsum | breather_p | breather_q |
                            tancos | instanton_p | instanton_q
                            expsum takes comma lists A, K, L, theta
    [funcs]                 beta, gamma, c0, c3, c4: a float constant or
                            "poly: c0, c1, c2" for c0 + c1*t + c2*t^2
    [signs]                 delta1, delta2 in {+1, -1}

Custom (callable) profiles cannot round-trip through a file.
"""

from __future__ import annotations

import configparser
import io

from .ansatz import CoefficientFunctions, SeparationCoefficients, SolutionSpec
from .profiles import (
    BreatherPProfile,
    BreatherQProfile,
    ExpSumProfile,
    InstantonPProfile,
    InstantonQProfile,
    TanCosProfile,
    TimeFunction,
    const_fn,
    poly_fn,
)

__all__ = ["load_spec", "loads_spec", "dumps_spec", "SpecFileError"]


class SpecFileError(ValueError):
    pass


_FIXED_FAMILIES = {
    "breather_p": BreatherPProfile,
    "breather_q": BreatherQProfile,
    "tancos": TanCosProfile,
    "instanton_p": InstantonPProfile,
    "instanton_q": InstantonQProfile,
}


def _floats(raw: str) -> tuple:
    try:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    except ValueError as exc:
        raise SpecFileError(f"expected numbers, got {raw!r}") from exc


def _profile(sec) -> object:
    family = sec.get("family", "").strip().lower()
    if family == "expsum":
        missing = [k for k in ("a", "k", "l", "theta") if k not in sec]
        if missing:
            raise SpecFileError(f"expsum profile is missing {missing}")
        return ExpSumProfile(A=_floats(sec["a"]), K=_floats(sec["k"]),
                             L=_floats(sec["l"]), theta=_floats(sec["theta"]))
    if family in _FIXED_FAMILIES:
        return _FIXED_FAMILIES[family]()
    raise SpecFileError(f"unknown profile family {family!r}")


def _timefn(raw: str) -> TimeFunction:
    raw = raw.strip()
    if raw.lower().startswith("poly:"):
        return poly_fn(_floats(raw[5:]))
    try:
        return const_fn(float(raw))
    except ValueError as exc:
        raise SpecFileError(f"bad coefficient function {raw!r}") from exc


def loads_spec(text: str) -> SolutionSpec:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SpecFileError(f"unparseable spec file: {exc}") from exc
    for section in ("coeffs", "p", "q"):
        if section not in cp:
            raise SpecFileError(f"missing [{section}] section")
    try:
        coeffs = SeparationCoefficients(*(float(cp["coeffs"][k])
                                          for k in ("a0", "a1", "a2", "a3")))
    except (KeyError, ValueError) as exc:
        raise SpecFileError(f"bad [coeffs] section: {exc}") from exc

    p = _profile(cp["p"])
    q = _profile(cp["q"])

    fk = cp["funcs"] if "funcs" in cp else {}
    funcs = CoefficientFunctions(
        beta=_timefn(fk.get("beta", "1")),
        gamma=_timefn(fk.get("gamma", "0")),
        c0=_timefn(fk.get("c0", "1")),
        c3=_timefn(fk.get("c3", "0")),
        c4=_timefn(fk.get("c4", "0")),
    )
    sk = cp["signs"] if "signs" in cp else {}
    try:
        delta1 = int(float(sk.get("delta1", "1")))
        delta2 = int(float(sk.get("delta2", "1")))
        return SolutionSpec(coeffs, p, q, funcs, delta1, delta2)
    except ValueError as exc:
        raise SpecFileError(str(exc)) from exc


def load_spec(path) -> SolutionSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_spec(fh.read())


def _timefn_str(fn: TimeFunction) -> str:
    if fn.is_constant:
        return f"{fn.coeffs[0]:.17g}"
    return "poly: " + ", ".join(f"{c:.17g}" for c in fn.coeffs)


def dumps_spec(spec: SolutionSpec) -> str:
    cp = configparser.ConfigParser()
    cp["coeffs"] = {k: f"{getattr(spec.coeffs, k):.17g}"
                    for k in ("a0", "a1", "a2", "a3")}
    for name, prof in (("p", spec.p), ("q", spec.q)):
        if isinstance(prof, ExpSumProfile):
            cp[name] = {
                "family": "expsum",
                "A": ", ".join(f"{v:.17g}" for v in prof.A),
                "K": ", ".join(f"{v:.17g}" for v in prof.K),
                "L": ", ".join(f"{v:.17g}" for v in prof.L),
                "theta": ", ".join(f"{v:.17g}" for v in prof.theta),
            }
        elif prof.family in _FIXED_FAMILIES:
            cp[name] = {"family": prof.family}
        else:
            raise SpecFileError(f"profile family {prof.family!r} has no file form")
    cp["funcs"] = {k: _timefn_str(getattr(spec.funcs, k))
                   for k in ("beta", "gamma", "c0", "c3", "c4")}
    cp["signs"] = {"delta1": str(spec.delta1), "delta2": str(spec.delta2)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
