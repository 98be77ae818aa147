"""Compact structure groups: cyclic and small symmetric groups (exact) and SU(2).

SU(2) elements are unit quaternions ``(w, x, y, z)``; ``q`` and ``-q`` are
different elements.  Permutations are stored in one-line notation, ``p[i]`` is
the image of ``i``, and products compose right to left: ``(a * b)[i] == a[b[i]]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .errors import IncompatibleGroupError, ParseError

CYCLIC = "cyclic"
SYMMETRIC = "symmetric"
SU2 = "su2"

DEFAULT_TOLERANCE = 1e-6
MAX_SYMMETRIC = 6

Payload = Union[int, tuple]


@dataclass(frozen=True)
class GroupDescriptor:
    kind: str
    n: int | None = None
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.kind == CYCLIC:
            if not isinstance(self.n, int) or self.n < 1:
                raise ValueError(f"cyclic group order must be a positive integer, got {self.n!r}")
        elif self.kind == SYMMETRIC:
            if not isinstance(self.n, int) or not 1 <= self.n <= MAX_SYMMETRIC:
                raise ValueError(f"symmetric degree must be in 1..{MAX_SYMMETRIC}, got {self.n!r}")
        elif self.kind == SU2:
            if self.n is not None:
                raise ValueError("su2 takes no order parameter")
            if not self.tolerance > 0:
                raise ValueError("su2 tolerance must be strictly positive")
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")

    @property
    def is_finite(self) -> bool:
        return self.kind != SU2

    @property
    def order(self) -> int | None:
        if self.kind == CYCLIC:
            return self.n
        if self.kind == SYMMETRIC:
            return math.factorial(self.n)
        return None

    def __str__(self):
        if self.kind == SU2:
            if self.tolerance == DEFAULT_TOLERANCE:
                return SU2
            return f"{SU2}:{self.tolerance!r}"
        return f"{self.kind}:{self.n}"


def cyclic(n: int) -> GroupDescriptor:
    return GroupDescriptor(CYCLIC, n)


def symmetric(n: int) -> GroupDescriptor:
    return GroupDescriptor(SYMMETRIC, n)


def su2(tolerance: float = DEFAULT_TOLERANCE) -> GroupDescriptor:
    return GroupDescriptor(SU2, None, tolerance)


@dataclass(frozen=True)
class GroupElement:
    descriptor: GroupDescriptor
    payload: Payload

    def __post_init__(self):
        d, p = self.descriptor, self.payload
        if d.kind == CYCLIC:
            if not isinstance(p, (int, np.integer)) or not 0 <= p < d.n:
                raise ValueError(f"cyclic({d.n}) residue out of range: {p!r}")
            object.__setattr__(self, "payload", int(p))
        elif d.kind == SYMMETRIC:
            p = tuple(int(i) for i in p)
            if sorted(p) != list(range(d.n)):
                raise ValueError(f"not a permutation of 0..{d.n - 1}: {p!r}")
            object.__setattr__(self, "payload", p)
        else:
            p = tuple(float(c) for c in p)
            if len(p) != 4:
                raise ValueError("su2 payload needs 4 components")
            if abs(math.sqrt(sum(c * c for c in p)) - 1.0) > d.tolerance:
                raise ValueError(f"su2 payload is not a unit quaternion: {p!r}")
            object.__setattr__(self, "payload", p)

    def __mul__(self, other):
        return multiply(self, other)

    def inverse(self):
        return inverse(self)

    def __str__(self):
        return format_element(self)


def _check_same(a: GroupElement, b: GroupElement) -> None:
    if a.descriptor != b.descriptor:
        raise IncompatibleGroupError(f"elements of {a.descriptor} and {b.descriptor} cannot be combined")


def _qmul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def _normalize(q):
    norm = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    return (q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    _check_same(a, b)
    d = a.descriptor
    if d.kind == CYCLIC:
        return GroupElement(d, (a.payload + b.payload) % d.n)
    if d.kind == SYMMETRIC:
        return GroupElement(d, tuple(a.payload[i] for i in b.payload))
    return GroupElement(d, _normalize(_qmul(a.payload, b.payload)))


def inverse(a: GroupElement) -> GroupElement:
    d = a.descriptor
    if d.kind == CYCLIC:
        return GroupElement(d, (-a.payload) % d.n)
    if d.kind == SYMMETRIC:
        inv = [0] * d.n
        for i, j in enumerate(a.payload):
            inv[j] = i
        return GroupElement(d, tuple(inv))
    w, x, y, z = a.payload
    return GroupElement(d, (w, -x, -y, -z))


def identity(d: GroupDescriptor) -> GroupElement:
    if d.kind == CYCLIC:
        return GroupElement(d, 0)
    if d.kind == SYMMETRIC:
        return GroupElement(d, tuple(range(d.n)))
    return GroupElement(d, (1.0, 0.0, 0.0, 0.0))


def product(elements, d: GroupDescriptor) -> GroupElement:
    """Ordered product ``elements[0] * elements[1] * ...``; identity when empty."""
    result = identity(d)
    for g in elements:
        result = multiply(result, g)
    return result


def haar_sample(d: GroupDescriptor, rng: np.random.Generator) -> GroupElement:
    if d.kind == CYCLIC:
        return GroupElement(d, int(rng.integers(d.n)))
    if d.kind == SYMMETRIC:
        return GroupElement(d, tuple(int(i) for i in rng.permutation(d.n)))
    # isotropic Gaussian direction is uniform on S^3
    while True:
        v = rng.standard_normal(4)
        norm = float(np.sqrt(v @ v))
        if norm > 1e-12:
            return GroupElement(d, tuple(v / norm))


def distance(a: GroupElement, b: GroupElement) -> float:
    """0/1 for finite groups, largest component difference for su2 (no sign flip)."""
    _check_same(a, b)
    if a.descriptor.is_finite:
        return 0.0 if a.payload == b.payload else 1.0
    return max(abs(p - q) for p, q in zip(a.payload, b.payload))


def equal(a: GroupElement, b: GroupElement) -> bool:
    _check_same(a, b)
    if a.descriptor.is_finite:
        return a.payload == b.payload
    return distance(a, b) <= a.descriptor.tolerance


def elements(d: GroupDescriptor) -> Iterator[GroupElement]:
    """Every element of a finite group, in a fixed order."""
    if d.kind == CYCLIC:
        for k in range(d.n):
            yield GroupElement(d, k)
    elif d.kind == SYMMETRIC:
        for p in itertools.permutations(range(d.n)):
            yield GroupElement(d, p)
    else:
        raise ValueError("su2 cannot be enumerated")


def trace(a: GroupElement) -> float:
    """Real class function used for Wilson loops.

    su2: trace of the 2x2 matrix, ``2w``.  cyclic(n): ``cos(2 pi k / n)``,
    the real part of the defining character.  symmetric: number of fixed points.
    """
    d = a.descriptor
    if d.kind == SU2:
        return 2.0 * a.payload[0]
    if d.kind == CYCLIC:
        return math.cos(2.0 * math.pi * a.payload / d.n)
    return float(sum(1 for i, j in enumerate(a.payload) if i == j))


# -- text forms -------------------------------------------------------------

def parse_descriptor(text: str) -> GroupDescriptor:
    text = text.strip()
    kind, _, arg = text.partition(":")
    try:
        if kind == SU2:
            return su2(float(arg)) if arg else su2()
        if kind in (CYCLIC, SYMMETRIC) and arg:
            return GroupDescriptor(kind, int(arg))
    except ValueError as exc:
        raise ParseError(f"bad group descriptor {text!r}: {exc}") from None
    raise ParseError(f"bad group descriptor {text!r}; expected cyclic:N, symmetric:N or su2")


def format_element(a: GroupElement) -> str:
    d = a.descriptor
    if d.kind == CYCLIC:
        return str(a.payload)
    if d.kind == SYMMETRIC:
        return "[" + ",".join(str(i) for i in a.payload) + "]"
    return " ".join(repr(c) for c in a.payload)


def parse_element(text: str, d: GroupDescriptor) -> GroupElement:
    text = str(text).strip()
    try:
        if d.kind == CYCLIC:
            return GroupElement(d, int(text))
        if d.kind == SYMMETRIC:
            if not (text.startswith("[") and text.endswith("]")):
                raise ValueError("permutation must be written as [i0,i1,...]")
            body = text[1:-1].strip()
            return GroupElement(d, tuple(int(t) for t in body.split(",")) if body else ())
        parts = text.split()
        if len(parts) != 4:
            raise ValueError("su2 element needs 4 reals")
        return GroupElement(d, tuple(float(t) for t in parts))
    except ValueError as exc:
        raise ParseError(f"bad {d} element {text!r}: {exc}") from None
