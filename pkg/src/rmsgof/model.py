"""Discrete model distributions: validation, builtin families, text/CSV I/O.

A model distribution is the vector of bin probabilities p_1..p_n under the
null hypothesis.  Builtin families cover the six benchmark models (a)-(f)
used for the significance curves plus the model/actual pairs used in the
power experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import (
    NonPositiveProbability,
    NotFinite,
    ParseError,
    TooFewBins,
    UnsupportedBinCount,
)

TABLE3_BIN_COUNTS = {"a": 500, "b": 250, "c": 100, "d": 50, "e": 25, "f": 10}


def _kahan_sum(values: np.ndarray) -> float:
    # compensated summation; n <= 500 hardly needs it, but it keeps the
    # normalization constants uniform across platforms
    total = 0.0
    comp = 0.0
    for v in values:
        y = float(v) - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


@dataclass(frozen=True, eq=False)
class ModelDistribution:
    """Normalized bin probabilities p_1..p_n, all strictly positive."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def __len__(self) -> int:
        return self.n


def make_distribution(weights: Sequence[float]) -> ModelDistribution:
    """Validate and normalize a sequence of positive weights.

    Weights need not sum to one; they are divided by their (Kahan) sum.
    Raises NotFinite, NonPositiveProbability or TooFewBins.
    """
    arr = np.asarray(weights, dtype=float)
    if arr.ndim != 1:
        raise ParseError(0, "expected a one-dimensional sequence of weights")
    if arr.size < 2:
        raise TooFewBins(f"need at least 2 bins, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise NotFinite(f"weight at position {bad + 1} is not finite")
    if np.any(arr <= 0.0):
        bad = int(np.flatnonzero(arr <= 0.0)[0])
        raise NonPositiveProbability(
            f"weight at position {bad + 1} is {arr[bad]!r}; all weights must be > 0"
        )
    total = _kahan_sum(arr)
    return ModelDistribution(arr / total)


@dataclass(frozen=True)
class BuiltinFamily:
    """Identifier of a builtin model family.

    kind: "table3" (benchmark curves, letter 'a'..'f', fixed n),
          "ex1-model"/"ex1-actual" (the two-heavy-bins pair, any n >= 3),
          "zipf" (p_k proportional to k**-s, any n >= 2),
          "uniform" (equal bins).
    """

    kind: str
    n: int
    letter: str | None = None
    exponent: float | None = None


def _table3_weights(letter: str, n: int) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=float)
    if letter == "a":
        return (300.0 + k) ** -2.0
    if letter == "b":
        return (260.0 - k) ** 3.0
    if letter == "c":
        return np.floor((40.0 + k) / 40.0) ** (-1.0 / 6.0)
    if letter == "d":
        return 0.5 + np.log(np.floor((61.0 - k) / 10.0))
    if letter == "e":
        return np.exp(-5.0 * k / 8.0)
    if letter == "f":
        return np.exp(-((k - 1.0) ** 2) / 6.0)
    raise UnsupportedBinCount(f"unknown benchmark family {letter!r}")


def generate_builtin(family: BuiltinFamily) -> ModelDistribution:
    """Generate a builtin family; deterministic, normalization computed fresh."""
    kind, n = family.kind, family.n
    if kind == "table3":
        letter = family.letter or ""
        fixed = TABLE3_BIN_COUNTS.get(letter)
        if fixed is None:
            raise UnsupportedBinCount(f"unknown benchmark family {letter!r}")
        if n != fixed:
            raise UnsupportedBinCount(
                f"family ({letter}) is defined for n={fixed}, got n={n}"
            )
        return make_distribution(_table3_weights(letter, n))
    if kind in ("ex1-model", "ex1-actual"):
        if n < 3:
            raise UnsupportedBinCount(f"{kind} needs n >= 3, got n={n}")
        w = np.full(n, 1.0 / (2.0 * n - 4.0))
        if kind == "ex1-model":
            w[0] = w[1] = 0.25
        else:
            w[0] = 0.375
            w[1] = 0.125
        return make_distribution(w)
    if kind == "zipf":
        if n < 2:
            raise UnsupportedBinCount(f"zipf needs n >= 2, got n={n}")
        s = family.exponent
        if s is None or not math.isfinite(s):
            raise UnsupportedBinCount("zipf needs a finite exponent s")
        k = np.arange(1, n + 1, dtype=float)
        return make_distribution(k ** (-s))
    if kind == "uniform":
        if n < 2:
            raise UnsupportedBinCount(f"uniform needs n >= 2, got n={n}")
        return make_distribution(np.ones(n))
    raise UnsupportedBinCount(f"unknown builtin kind {family.kind!r}")


BUILTIN_KINDS = ("table3", "ex1-model", "ex1-actual", "zipf", "uniform")


def parse_family(spec: str) -> BuiltinFamily:
    """Parse a builtin spec string such as "table3:e", "ex1-model:n=16",
    "zipf:s=1,n=100" or "uniform:n=5"."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind not in BUILTIN_KINDS:
        raise UnsupportedBinCount(f"unknown builtin kind {kind!r} in {spec!r}")
    letter = None
    exponent = None
    n = None
    for part in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = part.partition("=")
        if not eq:
            if kind == "table3" and letter is None:
                letter = key
                continue
            raise UnsupportedBinCount(f"cannot parse {part!r} in {spec!r}")
        if key == "n":
            n = int(value)
        elif key == "s":
            exponent = float(value)
        else:
            raise UnsupportedBinCount(f"unknown parameter {key!r} in {spec!r}")
    if kind == "table3":
        if letter is None:
            raise UnsupportedBinCount(f"table3 spec needs a family letter: {spec!r}")
        if n is None:
            n = TABLE3_BIN_COUNTS.get(letter, 0)
    if n is None:
        raise UnsupportedBinCount(f"builtin spec {spec!r} needs n=<bins>")
    return BuiltinFamily(kind=kind, n=n, letter=letter, exponent=exponent)


def _iter_lines(source: IO[str] | Iterable[str]) -> Iterable[str]:
    if hasattr(source, "read"):
        return source.read().splitlines()
    return list(source)


def load_distribution(source: IO[str] | Iterable[str], format: str = "auto") -> ModelDistribution:
    """Read a distribution from a text stream.

    Text format: one weight per line, '#' comments, blank lines ignored,
    LF or CRLF.  CSV format: a single column named "p".  Weights are
    normalized exactly as in make_distribution.
    """
    if format not in ("auto", "text", "csv"):
        raise ValueError(f"unknown format {format!r}")
    weights = []
    header_seen = False
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "," in line:
            fields = [f.strip() for f in line.split(",")]
            if any(fields[1:]):
                raise ParseError(lineno, "expected a single column")
            line = fields[0]
        if not weights and not header_seen:
            if format == "csv" or (format == "auto" and not _is_number(line)):
                if line != "p":
                    raise ParseError(lineno, f'expected CSV header "p", got {line!r}')
                header_seen = True
                continue
        if not _is_number(line):
            raise ParseError(lineno, f"cannot parse weight {line!r}")
        weights.append((lineno, float(line)))
    if format == "csv" and not header_seen:
        raise ParseError(0, 'missing CSV header "p"')
    if len(weights) < 2:
        raise TooFewBins(f"need at least 2 bins, got {len(weights)}")
    values = np.array([w for _, w in weights])
    try:
        return make_distribution(values)
    except (NonPositiveProbability, NotFinite) as exc:
        # re-raise with the offending line number attached
        bad = np.flatnonzero(~np.isfinite(values) | (values <= 0.0))[0]
        raise type(exc)(f"line {weights[bad][0]}: {exc}") from None


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def dump_distribution(dist: ModelDistribution, stream: IO[str]) -> None:
    """Write one probability per line at full (round-trip) precision."""
    for p in dist.probs:
        stream.write(repr(float(p)) + "\n")
