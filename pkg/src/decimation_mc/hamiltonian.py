"""Finite-volume energies with boundary conditions, and annulus sizing.

A :class:`LatticeSystem` lays a configuration, its frozen sites and the
exterior boundary condition onto one padded grid so that energies, fields
and sweeps all read from the same arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .config import MINUS, PLUS, SCALAR, SpinConfiguration, unit_vectors, wrap_angle
from .couplings import (
    AXIAL_LR,
    BIAXIAL_LR,
    ISOTROPIC_FAMILIES,
    NN_FAMILIES,
    CouplingModel,
    InteractionKernel,
    hurwitz_tail,
)
from .kernels import get_kernels
from .lattice import Box, Site, SiteSet

FREE = "free"
_LEVELS = (PLUS, MINUS, FREE)


@dataclass(frozen=True)
class BoundarySpec:
    """Exterior values plus extra pinned sites inside the configuration window.

    ``exterior`` is ``"plus"``, ``"minus"``, ``"free"`` (no exterior spins)
    or a configuration covering the window padded by the kernel reach.
    Sites in ``frozen`` keep the values of the configuration they are
    attached to.
    """

    exterior: str | SpinConfiguration = PLUS
    frozen: SiteSet | None = None

    def __post_init__(self):
        if isinstance(self.exterior, str) and self.exterior not in _LEVELS:
            raise ValueError(f"exterior must be one of {_LEVELS} or a configuration")

    def negated(self) -> "BoundarySpec":
        ext = self.exterior
        if isinstance(ext, str):
            ext = {PLUS: MINUS, MINUS: PLUS, FREE: FREE}[ext]
        else:
            ext = negate(ext)
        return BoundarySpec(ext, self.frozen)


def negate(config: SpinConfiguration) -> SpinConfiguration:
    """Global flip: sigma -> -sigma, theta -> -theta (reflects sin theta)."""
    return SpinConfiguration(config.kind, config.box, -config.values, config.frozen.copy())


class LatticeSystem:
    """A configuration embedded in its boundary condition on a padded grid."""

    def __init__(
        self,
        config: SpinConfiguration,
        bc: BoundarySpec,
        model: CouplingModel,
        kernel: InteractionKernel,
        region: SiteSet | None = None,
        backend: str | None = None,
    ):
        if config.kind != model.kind:
            raise ValueError(f"{model.family} needs {model.kind} spins, got {config.kind}")
        self.model = model
        self.kernel = kernel
        self.kind = config.kind
        self.window = config.box
        self.pad = max(kernel.reach, 1)
        self.grid = Box(config.L + self.pad)
        self.k = get_kernels(backend)
        self.offsets = np.ascontiguousarray(kernel.offsets, dtype=np.int64)
        self.weights = np.ascontiguousarray(kernel.weights, dtype=np.float64)
        self.wx, self.wy = model.component_weights

        values, present = self._exterior(bc.exterior)
        d = self.pad
        inner = (slice(d, d + config.box.side),) * 2
        values[inner] = config.values
        present[inner] = True
        self.present = present

        free = np.zeros(self.grid.shape, dtype=bool)
        region_mask = np.ones(config.box.shape, dtype=bool) if region is None else region.expanded(config.box).mask
        pinned = config.frozen.copy()
        if bc.frozen is not None:
            pinned |= bc.frozen.expanded(config.box).mask
        free[inner] = region_mask & ~pinned
        self.free = free
        self.frozen = config.frozen | (bc.frozen.expanded(config.box).mask if bc.frozen is not None else False)
        self.sites = np.ascontiguousarray(np.argwhere(free), dtype=np.int64)

        if self.kind == SCALAR:
            self.spin = np.where(present, values, 0.0).astype(np.float64)
        else:
            self.theta = np.where(present, values, 0.0).astype(np.float64)
            c, s = unit_vectors(self.theta)
            self.cx = np.ascontiguousarray(np.where(present, c, 0.0))
            self.sy = np.ascontiguousarray(np.where(present, s, 0.0))

    def _exterior(self, ext) -> tuple[np.ndarray, np.ndarray]:
        shape = self.grid.shape
        if isinstance(ext, str):
            if ext == FREE:
                return np.zeros(shape), np.zeros(shape, dtype=bool)
            sign = 1.0 if ext == PLUS else -1.0
            level = sign if self.kind == SCALAR else sign * math.pi / 2
            return np.full(shape, level), np.ones(shape, dtype=bool)
        if ext.kind != self.kind:
            raise ValueError("exterior configuration kind does not match the model")
        if ext.L < self.grid.half_width:
            raise ValueError(
                f"missing exterior values within range: exterior covers L={ext.L}, "
                f"need {self.grid.half_width} (window {self.window.half_width} + reach {self.pad})"
            )
        return ext.restrict(self.grid).values.astype(float), np.ones(shape, dtype=bool)

    # -- bookkeeping ---------------------------------------------------

    @property
    def n_free(self) -> int:
        return int(self.sites.shape[0])

    def _gi(self, site) -> tuple[int, int]:
        if site not in self.grid:
            raise ValueError(f"site {tuple(site)} outside the system grid")
        return self.grid.index(site)

    def free_sites(self) -> list[Site]:
        W = self.grid.half_width
        return [Site(int(a) - W, int(b) - W) for a, b in self.sites]

    def is_free(self, site) -> bool:
        return site in self.grid and bool(self.free[self._gi(site)])

    def copy(self) -> "LatticeSystem":
        other = object.__new__(LatticeSystem)
        other.__dict__.update(self.__dict__)
        if self.kind == SCALAR:
            other.spin = self.spin.copy()
        else:
            other.theta = self.theta.copy()
            other.cx = self.cx.copy()
            other.sy = self.sy.copy()
        return other

    def value_at(self, site):
        a, b = self._gi(site)
        if self.kind == SCALAR:
            return int(self.spin[a, b])
        return float(self.theta[a, b])

    def vertical_at(self, site) -> float:
        """sigma, or sin(theta) for planar spins."""
        a, b = self._gi(site)
        return float(self.spin[a, b]) if self.kind == SCALAR else float(self.sy[a, b])

    def vertical_grid(self) -> np.ndarray:
        return self.spin if self.kind == SCALAR else self.sy

    def set_value(self, site, value):
        a, b = self._gi(site)
        if self.kind == SCALAR:
            if value not in (-1, 1):
                raise ValueError("scalar spins must be +1 or -1")
            self.spin[a, b] = float(value)
        else:
            t = wrap_angle(value)
            self.theta[a, b] = t
            c, s = unit_vectors(np.array(t))
            self.cx[a, b], self.sy[a, b] = float(c), float(s)

    def set_free_values(self, values: np.ndarray):
        """Assign all free sites at once (sweep order)."""
        a, b = self.sites[:, 0], self.sites[:, 1]
        if self.kind == SCALAR:
            self.spin[a, b] = values
        else:
            t = wrap_angle(np.asarray(values, dtype=float))
            self.theta[a, b] = t
            c, s = unit_vectors(t)
            self.cx[a, b], self.sy[a, b] = c, s

    def configuration(self) -> SpinConfiguration:
        """Current values on the configuration window (vacant cells read as +1 / angle 0)."""
        d = self.pad
        inner = (slice(d, d + self.window.side),) * 2
        vals = self.spin[inner] if self.kind == SCALAR else self.theta[inner]
        if self.kind == SCALAR:
            vals = np.where(self.present[inner], vals, 1.0)
        return SpinConfiguration(self.kind, self.window, vals.copy(), self.frozen.copy())

    # -- fields and energies ------------------------------------------

    def _raw_fields(self, sites: np.ndarray, grids=None):
        if self.kind == SCALAR:
            spin = self.spin if grids is None else grids[0]
            return self.k.ising_fields(spin, sites, self.offsets, self.weights)
        cx, sy = (self.cx, self.sy) if grids is None else grids
        return self.k.rotator_fields(cx, sy, sites, self.offsets, self.weights)

    def local_field(self, site):
        """Ising: ``h = sum_j J(i,j) sigma_j``. Rotator: ``(wx*hx, wy*hy)``.

        The conditional energy of the site is ``-<field, spin>``.
        """
        if not self.is_free(site):
            raise ValueError(f"site {tuple(site)} is frozen or outside the update region")
        return self.field_at(site)

    def field_at(self, site):
        """Field at any site with full kernel support in the grid."""
        if site not in self.window:
            raise ValueError("fields are defined on the configuration window only")
        idx = np.array([self._gi(site)], dtype=np.int64)
        f = self._raw_fields(idx)
        if self.kind == SCALAR:
            return float(f[0])
        return np.array([self.wx * f[0][0], self.wy * f[1][0]])

    def free_fields(self):
        """Fields on every free site (sweep order)."""
        f = self._raw_fields(self.sites)
        if self.kind == SCALAR:
            return f
        return np.stack([self.wx * f[0], self.wy * f[1]], axis=1)

    def fields_from(self, mask: np.ndarray):
        """Fields on the free sites generated only by grid cells in ``mask``."""
        if self.kind == SCALAR:
            f = self._raw_fields(self.sites, (np.where(mask, self.spin, 0.0),))
            return f
        hx, hy = self._raw_fields(self.sites, (np.where(mask, self.cx, 0.0), np.where(mask, self.sy, 0.0)))
        return np.stack([self.wx * hx, self.wy * hy], axis=1)

    def energy(self) -> float:
        """``-sum J(i,j) <s_i . s_j>`` over pairs touching a free site, each once."""
        sites = self.sites
        a, b = sites[:, 0], sites[:, 1]
        if self.kind == SCALAR:
            h_all = self._raw_fields(sites)
            h_free = self._raw_fields(sites, (np.where(self.free, self.spin, 0.0),))
            return float(-np.sum(self.spin[a, b] * (h_all - 0.5 * h_free)))
        hx, hy = self._raw_fields(sites)
        fx, fy = self._raw_fields(sites, (np.where(self.free, self.cx, 0.0), np.where(self.free, self.sy, 0.0)))
        return float(
            -np.sum(self.wx * self.cx[a, b] * (hx - 0.5 * fx) + self.wy * self.sy[a, b] * (hy - 0.5 * fy))
        )

    def energy_delta(self, site, old, new) -> float:
        f = self.local_field(site)
        if self.kind == SCALAR:
            for v in (old, new):
                if v not in (-1, 1):
                    raise ValueError("scalar spins must be +1 or -1")
            return float(-f * (new - old))
        c0, s0 = unit_vectors(np.array([wrap_angle(old)]))
        c1, s1 = unit_vectors(np.array([wrap_angle(new)]))
        return float(-(f[0] * (c1[0] - c0[0]) + f[1] * (s1[0] - s0[0])))

    # -- dynamics -------------------------------------------------------

    def sweep(self, beta: float, key: int, ctr0: int, width: float = math.pi / 2) -> int:
        """One row-major sweep over the free sites; returns accepted moves."""
        key = np.uint64(key)
        ctr0 = np.uint64(ctr0)
        if self.kind == SCALAR:
            self.k.ising_sweep(self.spin, self.sites, self.offsets, self.weights, float(beta), key, ctr0)
            return self.n_free
        return int(
            self.k.rotator_sweep(
                self.theta, self.cx, self.sy, self.sites, self.offsets, self.weights,
                float(self.wx), float(self.wy), float(beta), float(width), key, ctr0,
            )
        )

    @property
    def draws_per_sweep(self) -> int:
        return self.n_free if self.kind == SCALAR else 2 * self.n_free


# -- functional forms --------------------------------------------------------


def total_energy(region, config, bc, model, kernel) -> float:
    return LatticeSystem(config, bc, model, kernel, region).energy()


def local_field(site, config, bc, model, kernel):
    return LatticeSystem(config, bc, model, kernel).local_field(site)


def energy_delta(site, old_value, new_value, config, bc, model, kernel) -> float:
    return LatticeSystem(config, bc, model, kernel).energy_delta(site, old_value, new_value)


# -- equivalence of boundary conditions ---------------------------------------


@dataclass(frozen=True)
class AnnulusSchedule:
    L: int
    N: int
    bound_C: float
    alpha_eff: float | None
    asymptotic_exponent: float | None


def _check_agree_inside(bc1, bc2, N: int):
    def on_box(bc):
        if bc is None:
            return None
        ext = bc.exterior if isinstance(bc, BoundarySpec) else bc
        if isinstance(ext, str):
            return ext
        return ext.restrict(Box(min(N, ext.L)))

    a, b = on_box(bc1), on_box(bc2)
    if a is None or b is None:
        return
    if isinstance(a, str) or isinstance(b, str):
        if isinstance(a, str) and isinstance(b, str):
            if a != b:
                raise ValueError("boundary conditions differ inside the annulus box")
            return
        level, conf = (a, b) if isinstance(a, str) else (b, a)
        target = {PLUS: 1.0, MINUS: -1.0}.get(level)
        if target is None or not np.all(conf.vertical() == target):
            raise ValueError("boundary conditions differ inside the annulus box")
        return
    n = min(a.L, b.L)
    if not np.array_equal(a.restrict(Box(n)).values, b.restrict(Box(n)).values):
        raise ValueError("boundary conditions differ inside the annulus box")


def _bound_mp(model: CouplingModel, L: int, N: int) -> mpmath.mpf:
    """Worst-case ``2 sum_{x in Box(L)} sum_{y not in Box(N)} J(x, y)``."""
    f = model.family
    if f in NN_FAMILIES:
        return mpmath.mpf(0)
    J = mpmath.mpf(model.J)
    side = 2 * L + 1
    if f in (AXIAL_LR, BIAXIAL_LR):
        # exact: along a row, y1 > N contributes zeta(alpha, N - x1 + 1) and
        # y1 < -N mirrors it; summing over x1 in [-L, L] twice the one-sided sum
        def axis(alpha):
            return 2 * mpmath.fsum(hurwitz_tail(alpha, N + x + 1) for x in range(-L, L + 1))

        total = side * axis(model.alpha1)
        if f == BIAXIAL_LR:
            total += side * axis(model.alpha2)
        return 2 * J * total
    # isotropic: |x|_inf = m forces |y - x|_inf > N - m, and the sup-norm shell
    # of radius k carries at most 8 I k^(1-a) + 4 (1 - 2^(-a/2)) k^(-a)
    a = mpmath.mpf(model.alpha1)
    I = mpmath.quad(lambda t: (1 + t * t) ** (-a / 2), [0, 1])
    c_edge = 4 * (1 - mpmath.power(2, -a / 2))

    def shell_tail(M):
        return 8 * I * hurwitz_tail(a - 1, M + 1) + c_edge * hurwitz_tail(a, M + 1)

    total = mpmath.fsum((8 * m if m else 1) * shell_tail(N - m) for m in range(L + 1))
    return 2 * J * total


def bc_energy_difference(
    L: int,
    N: int,
    model: CouplingModel,
    kernel: InteractionKernel | None = None,
    bc1=None,
    bc2=None,
) -> float:
    """Bound on ``|H(sigma | bc1) - H(sigma | bc2)|`` for bcs agreeing on ``Box(N)``.

    Covers the untruncated couplings, so ``kernel`` is accepted for interface
    symmetry only. Axial families are summed exactly; isotropic families use
    a sup-norm shell bound that is tight to relative order ``1/(N - L)``.
    """
    if N <= L:
        raise ValueError(f"need N > L, got N={N}, L={L}")
    _check_agree_inside(bc1, bc2, N)
    with mpmath.workdps(40):
        return float(_bound_mp(model, L, N))


def asymptotic_exponent(model: CouplingModel) -> float | None:
    if model.family in NN_FAMILIES:
        return None
    a = model.alpha_eff
    if model.family in ISOTROPIC_FAMILIES:
        return 2.0 / (a - 2.0)
    return 2.0 / (a - 1.0)


def annulus_size(model: CouplingModel, L: int, target_C: float = 1.0) -> AnnulusSchedule:
    """Smallest ``N > L`` whose boundary-energy bound is at most ``target_C``."""
    if not target_C > 0:
        raise ValueError(f"target_C must be positive, got {target_C}")
    if L < 0:
        raise ValueError("L must be non-negative")
    if model.family in NN_FAMILIES:
        return AnnulusSchedule(L, L + 1, 0.0, None, None)
    with mpmath.workdps(40):
        target = mpmath.mpf(target_C)
        lo = L  # invariant: bound(lo) > target, or lo == L
        hi = L + 1
        while _bound_mp(model, L, hi) > target:
            lo, hi = hi, 2 * hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _bound_mp(model, L, mid) > target:
                lo = mid
            else:
                hi = mid
        bound = float(_bound_mp(model, L, hi))
    return AnnulusSchedule(L, hi, bound, model.alpha_eff, asymptotic_exponent(model))


def schedule_N(model: CouplingModel, L: int) -> int:
    """``N(L) = L^p`` with the family's asymptotic exponent ``p`` (at least ``L + 1``)."""
    p = asymptotic_exponent(model)
    if p is None:
        return L + 1
    return max(L + 1, math.ceil(L ** p - 1e-9))
