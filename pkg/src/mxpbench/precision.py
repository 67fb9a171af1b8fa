"""Reduced-precision floating-point emulation.

Every value lives in a float64 container; "being in format f" means the
value is a fixed point of :func:`round_to` for f.  Rounding is IEEE
round-to-nearest, ties-to-even, with gradual underflow and overflow to inf.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Format:
    name: str
    precision_bits: int
    exponent_bits: int
    # numpy dtype whose arithmetic is exactly this format's IEEE arithmetic
    dtype: type | None = field(default=None, compare=False, repr=False)

    @property
    def emax(self) -> int:
        return (1 << (self.exponent_bits - 1)) - 1

    @property
    def emin(self) -> int:
        return 1 - self.emax

    @property
    def max_finite(self) -> float:
        return float(np.ldexp(2.0 - np.ldexp(1.0, 1 - self.precision_bits), self.emax))

    @property
    def smallest_normal(self) -> float:
        return float(np.ldexp(1.0, self.emin))

    @property
    def supports_subnormals(self) -> bool:
        return True

    @property
    def unit_roundoff(self) -> float:
        return unit_roundoff(self)

    def __str__(self):
        return self.name


BINARY64 = Format("binary64", 53, 11, np.float64)
BINARY32 = Format("binary32", 24, 8, np.float32)
BINARY16 = Format("binary16", 11, 5)
BFLOAT16 = Format("bfloat16", 8, 8)

FORMATS = {f.name: f for f in (BINARY64, BINARY32, BINARY16, BFLOAT16)}
CLI_NAMES = {"fp64": BINARY64, "fp32": BINARY32, "fp16": BINARY16, "bf16": BFLOAT16}
_SHORT = {v.name: k for k, v in CLI_NAMES.items()}


def get_format(fmt) -> Format:
    """Accept a Format, its full name ("binary16") or CLI alias ("fp16")."""
    if isinstance(fmt, Format):
        return fmt
    try:
        return CLI_NAMES.get(fmt) or FORMATS[fmt]
    except (KeyError, TypeError):
        raise ValueError(f"unknown floating-point format {fmt!r}") from None


def short_name(fmt) -> str:
    return _SHORT[get_format(fmt).name]


def unit_roundoff(fmt) -> float:
    fmt = get_format(fmt)
    return float(np.ldexp(1.0, -fmt.precision_bits))


def _round_generic(x: np.ndarray, fmt: Format) -> np.ndarray:
    p = fmt.precision_bits
    _, e = np.frexp(x)
    # exponent of the quantum (ulp) at x, clamped so subnormals share emin's ulp
    q = np.maximum(e - 1, fmt.emin) - (p - 1)
    r = np.ldexp(np.rint(np.ldexp(x, -q)), q)
    return np.where(np.abs(r) > fmt.max_finite, np.copysign(np.inf, x), r)


def round_to(x, fmt):
    """Round ``x`` (scalar or array) to the nearest value of ``fmt``.

    Ties go to even; magnitudes at or beyond the overflow midpoint become
    +-inf.  The result is returned in float64 storage with the same shape as
    the input (a Python float for scalar input).
    """
    fmt = get_format(fmt)
    scalar = np.ndim(x) == 0
    a = np.asarray(x, dtype=np.float64)
    if fmt.precision_bits == 53:
        r = a.copy() if not scalar else a
    elif fmt == BINARY32:
        with np.errstate(over="ignore"):
            r = a.astype(np.float32).astype(np.float64)
    elif fmt == BINARY16:
        # numpy converts double -> half in one correctly rounded step
        with np.errstate(over="ignore"):
            r = a.astype(np.float16).astype(np.float64)
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            r = _round_generic(a, fmt)
    return float(r) if scalar else r


def fits(x, fmt) -> bool:
    """True iff ``x`` rounds to a finite value of ``fmt``."""
    return bool(np.all(np.isfinite(round_to(x, fmt))))


def is_representable(x, fmt) -> bool:
    a = np.asarray(x, dtype=np.float64)
    r = round_to(a, fmt)
    return bool(np.array_equal(r, a, equal_nan=True))


def wider(a, b) -> Format:
    """The format with more significand bits (ties: the first one)."""
    a, b = get_format(a), get_format(b)
    return b if b.precision_bits > a.precision_bits else a
