"""Text formats: CSV emission, model specification files, potential files."""

from __future__ import annotations

import io
import math
from typing import Iterable, Sequence

import numpy as np

from .lattice import LatticePotential
from .model import DrivingProfile, Harmonic, ModelError, TwoLevelModel, make_preset


def fmt(x) -> str:
    """Locale-independent shortest round-trip formatting."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def read_csv(text: str):
    """Parse a CSV written by :func:`csv_text`; returns ``(columns, rows)`` of strings."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    cols = lines[0].split(",")
    return cols, [ln.split(",") for ln in lines[1:]]


# model specification files -------------------------------------------------

def _kv_lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelError(f"expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        yield key.strip(), value.strip()


def _vec(text):
    return tuple(float(v) for v in text.replace(" ", "").split(","))


def parse_model_text(text: str) -> TwoLevelModel:
    """Read a model from ``key = value`` lines.

    Either ``preset`` (with ``gamma``, ``mu`` and optionally ``alpha``) or an
    explicit profile: ``base_period``, ``a_sq``, ``branch``, repeated
    ``harmonic = m, re_cos, im_cos, re_sin, im_sin`` rows, optional ``a_sign``
    and frame vectors ``n1``, ``n2``, ``n3``.
    """
    kv = {}
    harmonics = []
    for key, value in _kv_lines(text):
        if key == "harmonic":
            parts = [float(v) for v in value.split(",")]
            if len(parts) != 5:
                raise ModelError(f"harmonic row needs 5 numbers, got {value!r}")
            m, rc, ic, rs, is_ = parts
            harmonics.append(Harmonic(int(m), complex(rc, ic), complex(rs, is_)))
        else:
            kv[key] = value
    if "preset" in kv:
        if harmonics or "base_period" in kv:
            raise ModelError("model file gives both a preset and an explicit profile")
        gamma = complex(kv.get("gamma", "0").replace("i", "j"))
        gamma = gamma.real if gamma.imag == 0 else gamma
        return make_preset(kv["preset"], gamma, float(kv.get("mu", 0)), kv.get("alpha"))
    if "base_period" not in kv or "a_sq" not in kv:
        raise ModelError("explicit model needs base_period and a_sq")
    a_sq = float(kv["a_sq"])
    frame = {}
    for name in ("n1", "n2", "n3"):
        if name in kv:
            frame[name] = _vec(kv[name])
    return TwoLevelModel(
        a_sq=a_sq,
        profile=DrivingProfile(float(kv["base_period"]), tuple(harmonics)),
        branch=kv.get("branch", "real" if a_sq >= 0 else "imaginary"),
        a_sign=int(kv.get("a_sign", 1)),
        **frame,
    )


def model_text(model: TwoLevelModel) -> str:
    lines = [
        f"base_period = {fmt(model.period)}",
        f"a_sq = {fmt(model.a_sq)}",
        f"branch = {model.branch}",
        f"a_sign = {model.a_sign}",
    ]
    for name in ("n1", "n2", "n3"):
        lines.append(f"{name} = " + ", ".join(fmt(v) for v in getattr(model, name)))
    for h in model.profile.harmonics:
        vals = (h.m, h.cos_amp.real, h.cos_amp.imag, h.sin_amp.real, h.sin_amp.imag)
        lines.append("harmonic = " + ", ".join(fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


# potential files -----------------------------------------------------------

def potential_text(pot: LatticePotential, header: Sequence[str] = ()) -> str:
    out = list(header)
    out.append(f"lattice_constant = {fmt(pot.lattice_constant)}")
    out.append(f"sign = {pot.sign}")
    out.append("n,re,im")
    for n, v in pot.fourier.items():
        out.append(f"{n},{fmt(v.real)},{fmt(v.imag)}")
    return "\n".join(out) + "\n"


def parse_potential_text(text: str) -> LatticePotential:
    L = None
    sign = "plus"
    coeffs = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or line == "n,re,im":
            continue
        if "=" in line:
            key, value = (s.strip() for s in line.split("=", 1))
            if key == "lattice_constant":
                L = float(value)
            elif key == "sign":
                sign = value
            continue
        n, re, im = line.split(",")
        coeffs[int(n)] = complex(float(re), float(im))
    if L is None:
        raise ValueError("potential file lacks lattice_constant")
    return LatticePotential(L, coeffs, sign)
