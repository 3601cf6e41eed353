"""Origin-centred windows of Z^2, sublattices and annuli.

Arrays indexed by a box of half-width ``L`` use ``[i1 + L, i2 + L]``, so
axis 0 carries the first coordinate ``i1`` and iteration is row-major in
``(i1, i2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np


class Site(NamedTuple):
    i1: int
    i2: int

    def __add__(self, other):  # type: ignore[override]
        return Site(self.i1 + other[0], self.i2 + other[1])

    def __neg__(self):
        return Site(-self.i1, -self.i2)

    @property
    def parity(self) -> int:
        """+1 on sites with i1 + i2 even, -1 otherwise."""
        return 1 - 2 * ((self.i1 + self.i2) & 1)

    @property
    def is_even(self) -> bool:
        return self.i1 % 2 == 0 and self.i2 % 2 == 0

    def sup_norm(self) -> int:
        return max(abs(self.i1), abs(self.i2))


ORIGIN = Site(0, 0)


def distance(i, j) -> float:
    return math.hypot(i[0] - j[0], i[1] - j[1])


@dataclass(frozen=True)
class Box:
    """The box ``([-L, L] cap Z)^2``."""

    half_width: int

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError(f"half_width must be non-negative, got {self.half_width}")

    @property
    def side(self) -> int:
        return 2 * self.half_width + 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.side, self.side)

    def __len__(self) -> int:
        return self.side * self.side

    def __contains__(self, site) -> bool:
        L = self.half_width
        return abs(site[0]) <= L and abs(site[1]) <= L

    def __iter__(self) -> Iterator[Site]:
        L = self.half_width
        for i1 in range(-L, L + 1):
            for i2 in range(-L, L + 1):
                yield Site(i1, i2)

    def index(self, site) -> tuple[int, int]:
        return (site[0] + self.half_width, site[1] + self.half_width)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate grids ``(I1, I2)`` of shape ``self.shape``."""
        r = np.arange(-self.half_width, self.half_width + 1)
        return np.meshgrid(r, r, indexing="ij")


class SiteSet:
    """A set of sites given by a boolean mask over a bounding box."""

    def __init__(self, box: Box, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != box.shape:
            raise ValueError(f"mask shape {mask.shape} does not match box {box.shape}")
        self.box = box
        self.mask = mask
        self.mask.setflags(write=False)

    @classmethod
    def from_sites(cls, box: Box, sites) -> "SiteSet":
        mask = np.zeros(box.shape, dtype=bool)
        for s in sites:
            if s not in box:
                raise ValueError(f"site {tuple(s)} outside box of half-width {box.half_width}")
            mask[box.index(s)] = True
        return cls(box, mask)

    @classmethod
    def full(cls, box: Box) -> "SiteSet":
        return cls(box, np.ones(box.shape, dtype=bool))

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __contains__(self, site) -> bool:
        return site in self.box and bool(self.mask[self.box.index(site)])

    def __iter__(self) -> Iterator[Site]:
        L = self.box.half_width
        for a, b in np.argwhere(self.mask):
            yield Site(int(a) - L, int(b) - L)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SiteSet):
            return NotImplemented
        return set(self) == set(other)

    def __repr__(self) -> str:
        return f"SiteSet(L={self.box.half_width}, n={len(self)})"

    def union(self, other: "SiteSet") -> "SiteSet":
        box = self.box if self.box.half_width >= other.box.half_width else other.box
        return SiteSet(box, self.expanded(box).mask | other.expanded(box).mask)

    def difference(self, other: "SiteSet") -> "SiteSet":
        return SiteSet(self.box, self.mask & ~other.expanded(self.box).mask)

    def expanded(self, box: Box) -> "SiteSet":
        """The same sites embedded in a box (sites outside ``box`` are dropped)."""
        if box == self.box:
            return self
        out = np.zeros(box.shape, dtype=bool)
        for s in self:
            if s in box:
                out[box.index(s)] = True
        return SiteSet(box, out)

    def to_list(self) -> list[list[int]]:
        return [[s.i1, s.i2] for s in self]


def even_sublattice(box: Box) -> SiteSet:
    """Sites of the box lying in 2Z^2."""
    I1, I2 = box.coordinates()
    return SiteSet(box, (I1 % 2 == 0) & (I2 % 2 == 0))


def invisible_sites(box: Box, include_origin: bool = False) -> SiteSet:
    """Sites of the box outside 2Z^2, optionally with the origin added back."""
    mask = ~even_sublattice(box).mask
    if include_origin:
        mask = mask.copy()
        mask[box.index(ORIGIN)] = True
    return SiteSet(box, mask)


def annulus(inner: Box, outer: Box) -> SiteSet:
    """``outer \\ inner`` for centred boxes with ``outer`` strictly larger."""
    L, N = inner.half_width, outer.half_width
    if N <= L:
        raise ValueError(f"annulus needs outer half-width > inner half-width, got N={N}, L={L}")
    I1, I2 = outer.coordinates()
    return SiteSet(outer, (np.abs(I1) > L) | (np.abs(I2) > L))
