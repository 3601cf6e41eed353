"""Coupling families, pair energies and truncated interaction kernels.

Axis 0 of every array is the first lattice coordinate ``i1``: the axial
long-range families decay along ``i1`` with exponent ``alpha1`` (and along
``i2`` with ``alpha2`` for the bi-axial family).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np

NN_ISING = "NNIsing"
AXIAL_LR = "AxialLR"
BIAXIAL_LR = "BiAxialLR"
ISO_LR_ISING = "IsoLRIsing"
ANISO_NN_ROTATOR = "AnisoNNRotator"
ISO_LR_ROTATOR = "IsoLRRotator"

FAMILIES = (NN_ISING, AXIAL_LR, BIAXIAL_LR, ISO_LR_ISING, ANISO_NN_ROTATOR, ISO_LR_ROTATOR)
ALIASES = {
    "NN": NN_ISING,
    "I1": AXIAL_LR,
    "I2": BIAXIAL_LR,
    "I3": ISO_LR_ISING,
    "V1": ANISO_NN_ROTATOR,
    "V2": ISO_LR_ROTATOR,
}
ISING_FAMILIES = (NN_ISING, AXIAL_LR, BIAXIAL_LR, ISO_LR_ISING)
ROTATOR_FAMILIES = (ANISO_NN_ROTATOR, ISO_LR_ROTATOR)
NN_FAMILIES = (NN_ISING, ANISO_NN_ROTATOR)
AXIAL_FAMILIES = (AXIAL_LR, BIAXIAL_LR)
ISOTROPIC_FAMILIES = (ISO_LR_ISING, ISO_LR_ROTATOR)


@dataclass(frozen=True)
class CouplingModel:
    family: str
    J: float = 1.0
    alpha1: float | None = None
    alpha2: float | None = None
    kappa: float | None = None
    beta: float | None = None

    def __post_init__(self):
        family = ALIASES.get(self.family, self.family)
        object.__setattr__(self, "family", family)
        if family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.J >= 0:
            raise ValueError(f"couplings must be ferromagnetic, got J={self.J}")
        if self.beta is not None and self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        a1, a2 = self.alpha1, self.alpha2
        if family == AXIAL_LR:
            _require(a1 is not None and a1 > 1, "AxialLR needs alpha1 > 1")
        elif family == BIAXIAL_LR:
            _require(a1 is not None and a2 is not None and a1 > 1 and a2 > 1, "BiAxialLR needs alpha1, alpha2 > 1")
        elif family == ISO_LR_ISING:
            _require(a1 is not None and a1 > 2, "IsoLRIsing needs alpha1 > 2")
        elif family == ISO_LR_ROTATOR:
            _require(a1 is not None and 2 < a1 <= 4, "IsoLRRotator needs alpha1 in (2, 4]")
        elif family == ANISO_NN_ROTATOR:
            _require(self.kappa is not None and 0 < self.kappa < 1, "AnisoNNRotator needs kappa in (0, 1)")

    @property
    def kind(self) -> str:
        return "scalar" if self.family in ISING_FAMILIES else "planar"

    @property
    def is_long_range(self) -> bool:
        return self.family not in NN_FAMILIES

    @property
    def component_weights(self) -> tuple[float, float]:
        """Weights of the (cos, sin) products in the planar inner product."""
        if self.family == ANISO_NN_ROTATOR:
            return (float(self.kappa), 1.0)
        return (1.0, 1.0)

    @property
    def alpha_eff(self) -> float | None:
        """Slowest decay exponent, which governs boundary-energy tails."""
        if self.family == BIAXIAL_LR:
            return min(self.alpha1, self.alpha2)
        return self.alpha1 if self.is_long_range else None

    def with_beta(self, beta: float) -> "CouplingModel":
        return CouplingModel(self.family, self.J, self.alpha1, self.alpha2, self.kappa, beta)

    def to_dict(self) -> dict:
        d = {"family": self.family, "J": self.J}
        for k in ("alpha1", "alpha2", "kappa", "beta"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CouplingModel":
        alpha1 = d.get("alpha1", d.get("alpha"))
        return cls(d["family"], float(d.get("J", 1.0)), alpha1, d.get("alpha2"), d.get("kappa"), d.get("beta"))


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def coupling(model: CouplingModel, i, j) -> float:
    """``J(i, j)`` for the model's family; zero where no term applies."""
    d1, d2 = abs(i[0] - j[0]), abs(i[1] - j[1])
    if d1 == 0 and d2 == 0:
        raise ValueError("coupling is undefined for i == j")
    return offset_coupling(model, d1, d2)


def offset_coupling(model: CouplingModel, d1: int, d2: int) -> float:
    d1, d2 = abs(d1), abs(d2)
    J = model.J
    f = model.family
    if f in NN_FAMILIES:
        return J if d1 + d2 == 1 else 0.0
    if f == AXIAL_LR:
        if d1 == 0 and d2 == 1:
            return J
        return J * d1 ** -model.alpha1 if d2 == 0 else 0.0
    if f == BIAXIAL_LR:
        if d1 == 0:
            return J * d2 ** -model.alpha2
        return J * d1 ** -model.alpha1 if d2 == 0 else 0.0
    return J * math.hypot(d1, d2) ** -model.alpha1


def pair_energy(model: CouplingModel, s_i, s_j) -> float:
    """The inner product ``<s_i . s_j>`` of the family (energy is ``-J(i,j)`` times it).

    Scalar spins are +-1; planar spins are angles in radians.
    """
    if model.kind == "scalar":
        if s_i not in (-1, 1) or s_j not in (-1, 1):
            raise ValueError("Ising families take spins in {-1, +1}")
        return float(s_i * s_j)
    if model.family == ANISO_NN_ROTATOR:
        return math.sin(s_i) * math.sin(s_j) + model.kappa * math.cos(s_i) * math.cos(s_j)
    return math.cos(s_i - s_j)


@dataclass(frozen=True, eq=False)
class InteractionKernel:
    """``J(0, v)`` for every offset ``0 < |v| <= R`` of the model's support.

    ``offsets``/``weights`` list the non-zero entries only (the sweep kernels
    loop over these); ``table`` is the dense ``(2R+1)^2`` view.
    """

    model: CouplingModel
    radius: int
    offsets: np.ndarray
    weights: np.ndarray
    shape: str = "euclidean"

    @cached_property
    def table(self) -> np.ndarray:
        R = self.radius
        t = np.zeros((2 * R + 1, 2 * R + 1))
        t[self.offsets[:, 0] + R, self.offsets[:, 1] + R] = self.weights
        return t

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, v) -> float:
        R = self.radius
        if abs(v[0]) > R or abs(v[1]) > R:
            return 0.0
        return float(self.table[v[0] + R, v[1] + R])

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def reach(self) -> int:
        """Largest sup-norm among stored offsets (padding needed around a region)."""
        return int(np.abs(self.offsets).max()) if len(self.offsets) else 0


KERNEL_SHAPES = ("euclidean", "square")


def build_kernel(model: CouplingModel, R: int, shape: str = "euclidean") -> InteractionKernel:
    """Truncated kernel. Isotropic families keep ``|v| <= R`` (``shape="euclidean"``)
    or the full ``(2R+1)^2`` square (``shape="square"``); other families ignore ``shape``.
    """
    if R < 1:
        raise ValueError(f"truncation radius must be >= 1, got {R}")
    if shape not in KERNEL_SHAPES:
        raise ValueError(f"shape must be one of {KERNEL_SHAPES}, got {shape!r}")
    f = model.family
    if f in NN_FAMILIES:
        offs = [(-1, 0), (0, -1), (0, 1), (1, 0)]
    elif f == AXIAL_LR:
        offs = [(k, 0) for k in range(-R, R + 1) if k] + [(0, -1), (0, 1)]
    elif f == BIAXIAL_LR:
        offs = [(k, 0) for k in range(-R, R + 1) if k] + [(0, k) for k in range(-R, R + 1) if k]
    else:
        offs = [
            (a, b)
            for a in range(-R, R + 1)
            for b in range(-R, R + 1)
            if (a or b) and (shape == "square" or a * a + b * b <= R * R)
        ]
    offs.sort()
    offsets = np.array(offs, dtype=np.int64).reshape(-1, 2)
    weights = np.array([offset_coupling(model, a, b) for a, b in offs], dtype=float)
    keep = weights > 0
    offsets, weights = offsets[keep], weights[keep]
    offsets.setflags(write=False)
    weights.setflags(write=False)
    return InteractionKernel(model, R, offsets, weights, shape)


def hurwitz_tail(alpha, start):
    """``sum_{k >= start} k^-alpha`` in mpmath precision."""
    return mpmath.zeta(mpmath.mpf(alpha), mpmath.mpf(start))


def lattice_zeta(alpha) -> mpmath.mpf:
    """``sum_{v in Z^2 \\ 0} |v|^-alpha = 4 zeta(s) beta(s)`` with ``s = alpha/2``."""
    s = mpmath.mpf(alpha) / 2
    return 4 * mpmath.zeta(s) * mpmath.dirichlet(s, [0, 1, 0, -1])


def tail_mass(model: CouplingModel, R: int, shape: str = "euclidean") -> float:
    """``sum_{|v| > R} J(0, v)``: the coupling mass dropped by truncating at ``R``.

    Evaluated in closed form (Hurwitz zeta per axis, lattice zeta minus the
    kept offsets for isotropic families), so it is both exact and an upper
    bound. Finite-range families return 0.
    """
    if R < 1:
        raise ValueError(f"truncation radius must be >= 1, got {R}")
    f = model.family
    J = model.J
    if f in NN_FAMILIES:
        return 0.0
    with mpmath.workdps(40):
        if f == AXIAL_LR:
            tail = 2 * hurwitz_tail(model.alpha1, R + 1)
        elif f == BIAXIAL_LR:
            tail = 2 * hurwitz_tail(model.alpha1, R + 1) + 2 * hurwitz_tail(model.alpha2, R + 1)
        else:
            tail = lattice_zeta(model.alpha1) - _isotropic_inner_sum(model.alpha1, R, shape)
        return float(J * tail)


def _isotropic_inner_sum(alpha: float, R: int, shape: str = "euclidean") -> mpmath.mpf:
    r = np.arange(-R, R + 1)
    d2 = (r[:, None] ** 2 + r[None, :] ** 2).ravel()
    d2 = d2[(d2 > 0) & (d2 <= R * R)] if shape == "euclidean" else d2[d2 > 0]
    # group equal squared distances so the mpmath work is over distinct radii
    vals, counts = np.unique(d2, return_counts=True)
    half = mpmath.mpf(alpha) / 2
    return mpmath.fsum(int(c) * mpmath.power(int(v), -half) for v, c in zip(vals, counts))
