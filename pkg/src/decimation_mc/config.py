"""Spin configurations on centred windows, special configurations and orders."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .lattice import Box, Site, SiteSet

SCALAR = "scalar"
PLANAR = "planar"
KINDS = (SCALAR, PLANAR)

PLUS = "plus"
MINUS = "minus"


def wrap_angle(theta):
    """Map angles to ``(-pi, pi]``."""
    theta = np.asarray(theta, dtype=float)
    out = np.pi - np.mod(np.pi - theta, 2.0 * np.pi)
    return out if out.ndim else float(out)


def angular_distance(a, b):
    """Geodesic distance on the circle, in ``[0, pi]``."""
    d = np.abs(wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))
    return d


def unit_vectors(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(cos, sin)`` of angles, exact at the four cardinal directions.

    Exactness matters for the frozen alternating rotator configuration whose
    vertical components must cancel to exactly zero.
    """
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    s = np.sin(theta)
    half = np.pi / 2
    c = np.where((theta == half) | (theta == -half), 0.0, c)
    s = np.where((theta == 0.0) | (theta == np.pi), 0.0, s)
    c = np.where(theta == np.pi, -1.0, np.where(theta == 0.0, 1.0, c))
    s = np.where(theta == half, 1.0, np.where(theta == -half, -1.0, s))
    return c, s


class OrderRelation(enum.Enum):
    EQUAL = "equal"
    LESS_EQUAL = "less_equal"
    GREATER_EQUAL = "greater_equal"
    INCOMPARABLE = "incomparable"

    @property
    def le(self) -> bool:
        return self in (OrderRelation.EQUAL, OrderRelation.LESS_EQUAL)

    @property
    def ge(self) -> bool:
        return self in (OrderRelation.EQUAL, OrderRelation.GREATER_EQUAL)


@dataclass
class SpinConfiguration:
    """Scalar (+-1) or planar (angle) values on ``Box(L)``.

    ``frozen`` marks sites that samplers never update.
    """

    kind: str
    box: Box
    values: np.ndarray
    frozen: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        values = np.asarray(self.values)
        if values.shape != self.box.shape:
            raise ValueError(f"values shape {values.shape} does not match box {self.box.shape}")
        if self.kind == SCALAR:
            if not np.all(np.abs(values) == 1):
                raise ValueError("scalar spins must be +1 or -1")
            values = values.astype(np.int8)
        else:
            values = np.asarray(wrap_angle(values.astype(float)), dtype=float).reshape(self.box.shape)
        self.values = values
        if self.frozen is None:
            self.frozen = np.zeros(self.box.shape, dtype=bool)
        else:
            frozen = np.asarray(self.frozen.mask if isinstance(self.frozen, SiteSet) else self.frozen, dtype=bool)
            if frozen.shape != self.box.shape:
                raise ValueError("frozen mask must lie in the configuration window")
            self.frozen = frozen.copy()

    @property
    def L(self) -> int:
        return self.box.half_width

    def __getitem__(self, site):
        v = self.values[self.box.index(site)]
        return int(v) if self.kind == SCALAR else float(v)

    def __setitem__(self, site, value):
        if self.kind == SCALAR:
            if value not in (-1, 1):
                raise ValueError("scalar spins must be +1 or -1")
            self.values[self.box.index(site)] = value
        else:
            self.values[self.box.index(site)] = wrap_angle(value)

    def copy(self) -> "SpinConfiguration":
        return SpinConfiguration(self.kind, self.box, self.values.copy(), self.frozen.copy())

    def frozen_sites(self) -> SiteSet:
        return SiteSet(self.box, self.frozen)

    def vertical(self) -> np.ndarray:
        """The order-relevant component: the spin itself, or ``sin theta``."""
        if self.kind == SCALAR:
            return self.values.astype(float)
        return unit_vectors(self.values)[1]

    def restrict(self, box: Box) -> "SpinConfiguration":
        """Sub-window of a (not smaller) configuration."""
        if box.half_width > self.L:
            raise ValueError("cannot restrict to a larger window")
        d = self.L - box.half_width
        sl = slice(d, d + box.side)
        return SpinConfiguration(self.kind, box, self.values[sl, sl].copy(), self.frozen[sl, sl].copy())

    def shifted(self, t) -> "SpinConfiguration":
        """Translate by ``t``; the result keeps the window, losing sites shifted out.

        Sites shifted in from outside are filled with +1 / angle 0 and are
        meaningful only on the overlap.
        """
        out = np.ones(self.box.shape) if self.kind == SCALAR else np.zeros(self.box.shape)
        L = self.L
        for s in self.box:
            src = Site(s.i1 - t[0], s.i2 - t[1])
            if src in self.box:
                out[s.i1 + L, s.i2 + L] = self.values[src.i1 + L, src.i2 + L]
        return SpinConfiguration(self.kind, self.box, out)

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        vals = self.values.ravel()
        return {
            "kind": self.kind,
            "L": self.L,
            "values": [int(v) for v in vals] if self.kind == SCALAR else [float(v) for v in vals],
            "frozen": self.frozen_sites().to_list(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SpinConfiguration":
        box = Box(int(d["L"]))
        values = np.asarray(d["values"], dtype=float)
        if values.size != len(box):
            raise ValueError(f"expected {len(box)} values for L={box.half_width}, got {values.size}")
        frozen = SiteSet.from_sites(box, [Site(*s) for s in d.get("frozen", [])]).mask
        return cls(d["kind"], box, values.reshape(box.shape), frozen)

    @classmethod
    def from_json(cls, text: str) -> "SpinConfiguration":
        return cls.from_dict(json.loads(text))


def alternating_ising(box: Box) -> SpinConfiguration:
    I1, I2 = box.coordinates()
    return SpinConfiguration(SCALAR, box, 1 - 2 * ((I1 + I2) & 1))


def alternating_rotator(box: Box, variant: str = "horizontal") -> SpinConfiguration:
    """Alternating planar configuration.

    ``"horizontal"``: angle 0 on even-parity sites, pi on odd ones (the
    alternating +-e1 configuration, default). ``"vertical"``: alternating
    +-pi/2.
    """
    I1, I2 = box.coordinates()
    odd = ((I1 + I2) & 1).astype(bool)
    if variant == "horizontal":
        theta = np.where(odd, np.pi, 0.0)
    elif variant == "vertical":
        theta = np.where(odd, -np.pi / 2, np.pi / 2)
    else:
        raise ValueError(f"unknown alternating variant {variant!r}")
    return SpinConfiguration(PLANAR, box, theta)


def homogeneous(box: Box, kind: str, level: str) -> SpinConfiguration:
    """All +1 / -1, or all angles +pi/2 / -pi/2."""
    if level not in (PLUS, MINUS):
        raise ValueError(f"level must be 'plus' or 'minus', got {level!r}")
    sign = 1 if level == PLUS else -1
    if kind == SCALAR:
        return SpinConfiguration(SCALAR, box, np.full(box.shape, sign))
    return SpinConfiguration(PLANAR, box, np.full(box.shape, sign * np.pi / 2))


def compare(a: SpinConfiguration, b: SpinConfiguration) -> OrderRelation:
    """Sitewise order: values for scalar spins, ``sin theta`` for planar ones."""
    if a.box != b.box:
        raise ValueError(f"window mismatch: L={a.L} vs L={b.L}")
    if a.kind != b.kind:
        raise ValueError("cannot compare scalar and planar configurations")
    va, vb = a.vertical(), b.vertical()
    le = bool(np.all(va <= vb))
    ge = bool(np.all(va >= vb))
    if le and ge:
        return OrderRelation.EQUAL
    if le:
        return OrderRelation.LESS_EQUAL
    if ge:
        return OrderRelation.GREATER_EQUAL
    return OrderRelation.INCOMPARABLE


compare_sin = compare


def in_sub_neighborhood(
    c: SpinConfiguration,
    center: SpinConfiguration,
    L: int,
    N: int,
    side: str,
    eps: float = 0.1,
) -> bool:
    """Membership in the +- sub-neighbourhood of ``center`` for ``(L, N)``.

    Inside ``Box(L)`` the configuration must match ``center`` (exactly for
    scalar spins, within angular distance ``eps`` for planar ones); on the
    annulus ``Box(N) \\ Box(L)`` it must equal the homogeneous ``side`` level
    (within ``eps`` of +-pi/2 for planar spins).
    """
    if N <= L:
        raise ValueError(f"need N > L, got N={N}, L={L}")
    if side not in (PLUS, MINUS):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    if c.L < N or center.L < L:
        raise ValueError("configuration window too small for the neighbourhood")
    if c.kind != center.kind:
        raise ValueError("kind mismatch")
    if c.kind == PLANAR and not 0 < eps < np.pi / 2:
        raise ValueError("eps must lie in (0, pi/2)")
    inner = c.restrict(Box(L)).values
    ref = center.restrict(Box(L)).values
    outer = c.restrict(Box(N))
    I1, I2 = Box(N).coordinates()
    ring = (np.abs(I1) > L) | (np.abs(I2) > L)
    sign = 1 if side == PLUS else -1
    if c.kind == SCALAR:
        return bool(np.all(inner == ref) and np.all(outer.values[ring] == sign))
    return bool(
        np.all(angular_distance(inner, ref) < eps)
        and np.all(angular_distance(outer.values[ring], sign * np.pi / 2) < eps)
    )
