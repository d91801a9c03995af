"""Censoring schemes: complete, Type-II and progressive Type-II.

Schemes are written compactly as comma-separated items where ``c*v`` repeats
``v`` c times and ``c*(v1,...,vk)`` repeats a tuple, e.g. ``"7*(0,0,1,0)"``
or ``"27*0,7"``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import groupby

import numpy as np


class SchemeParseError(ValueError):
    """Malformed scheme text; ``position`` is the offending character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class CensoringScheme:
    """``n`` units on test, ``R_k`` survivors withdrawn at the k-th failure."""

    n: int
    removals: tuple

    def __post_init__(self):
        removals = tuple(int(v) for v in self.removals)
        object.__setattr__(self, "removals", removals)
        n, r = int(self.n), len(removals)
        object.__setattr__(self, "n", n)
        if not 1 <= r <= n:
            raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
        if any(v < 0 for v in removals):
            raise ValueError("removal counts must be nonnegative")
        if sum(removals) != n - r:
            raise ValueError(
                f"removals sum to {sum(removals)}, expected n - r = {n - r}"
            )
        # with the sum fixed at n - r, every prefix is feasible automatically;
        # kept as an explicit guard.
        if np.any(np.cumsum(np.asarray(removals) + 1) > n):
            raise ValueError("scheme withdraws more units than remain on test")

    @property
    def r(self) -> int:
        return len(self.removals)

    @property
    def R(self) -> np.ndarray:
        return np.asarray(self.removals, dtype=float)

    @classmethod
    def type2(cls, n: int, r: int) -> "CensoringScheme":
        return cls(n, (0,) * (r - 1) + (n - r,))

    @classmethod
    def complete(cls, n: int) -> "CensoringScheme":
        return cls(n, (0,) * n)

    def __str__(self) -> str:
        return render_scheme(self)


_TOKEN = re.compile(r"\s*(?:(\d+)\s*\*\s*(?:\(([^()]*)\)|(\d+))|(\d+))\s*(?:,|$)")


def _parse_removals(text: str) -> list:
    out: list = []
    pos = 0
    if not text.strip():
        raise SchemeParseError("empty scheme", 0)
    body = text.strip()
    offset = len(text) - len(text.lstrip())
    # tolerate one pair of enclosing parentheses, as in "(7,27*0)"
    if body.startswith("(") and body.endswith(")") and _balanced_outer(body):
        body = body[1:-1]
        offset += 1
    while pos < len(body):
        mt = _TOKEN.match(body, pos)
        if mt is None or mt.end() == pos:
            raise SchemeParseError(f"unexpected {body[pos:pos + 8]!r}", offset + pos)
        count, group, single, plain = mt.groups()
        if plain is not None:
            out.append(int(plain))
        elif group is not None:
            try:
                values = [int(v) for v in group.split(",")]
            except ValueError:
                raise SchemeParseError(f"bad tuple {group!r}", offset + mt.start(2)) from None
            out.extend(values * int(count))
        else:
            out.extend([int(single)] * int(count))
        pos = mt.end()
        if body[mt.end() - 1 : mt.end()] == "," and pos == len(body):
            raise SchemeParseError("trailing comma", offset + pos - 1)
    return out


def _balanced_outer(body: str) -> bool:
    depth = 0
    for i, ch in enumerate(body):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and i < len(body) - 1:
            return False
    return True


def parse_scheme(text: str, n: int) -> CensoringScheme:
    """Expand compact scheme text for ``n`` units on test.

    >>> parse_scheme("3*0,4", 8).removals
    (0, 0, 0, 4)
    """
    removals = _parse_removals(text)
    r = len(removals)
    if sum(removals) != n - r:
        raise ValueError(
            f"scheme {text!r} removes {sum(removals)} units; with n={n} and "
            f"r={r} it must remove n - r = {n - r}"
        )
    return CensoringScheme(n, tuple(removals))


def render_scheme(scheme: CensoringScheme) -> str:
    """Compact text for a scheme (run-length form, parseable by :func:`parse_scheme`)."""
    items = []
    for value, run in groupby(scheme.removals):
        c = len(list(run))
        items.append(str(value) if c == 1 else f"{c}*{value}")
    return ",".join(items)


def normalization_constant_log(scheme: CensoringScheme) -> float:
    """``log C`` with ``C = prod_j sum_{k>=j} (R_k + 1)``.

    For a Type-II scheme this equals ``log(n! / (n - r)!)``.
    """
    tail = np.cumsum((scheme.R + 1.0)[::-1])[::-1]
    return float(np.sum(np.log(tail)))


def is_type2(scheme: CensoringScheme) -> bool:
    """True when only the last failure withdraws units (complete samples included)."""
    return all(v == 0 for v in scheme.removals[:-1])


def log_falling_factorial(n: int, r: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(n - r + 1)
