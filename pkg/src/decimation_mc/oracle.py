"""Exact references for small systems.

Everything here sums over the full state space of the free sites; nothing
shares code with the Monte Carlo updates beyond the system geometry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .config import PLANAR, SCALAR, SpinConfiguration, homogeneous
from .couplings import CouplingModel, InteractionKernel
from .hamiltonian import BoundarySpec, LatticeSystem
from .lattice import Box, Site, SiteSet
from .sampler import heat_bath_probability

MAX_ISING_SITES = 22
MAX_CLOCK_STATES = 20_000_000
BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))
_CHUNK = 1 << 16


@dataclass
class ExactResult:
    partition_value: float
    log_partition: float
    expectations: dict[str, float]
    site_marginals: dict[str, float]
    diagnostics: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "partition_value": self.partition_value,
            "log_partition": self.log_partition,
            "expectations": self.expectations,
            "site_marginals": self.site_marginals,
            "diagnostics": self.diagnostics,
        }


def site_label(site) -> str:
    return f"site({site[0]},{site[1]})"


def free_problem(system: LatticeSystem):
    """External fields on the free sites and the coupling matrix among them.

    Ising: ``h_ext`` of shape (n,). Rotator: ``(n, 2)`` raw (cos, sin) field
    sums before component weights.
    """
    sites = system.sites
    n = sites.shape[0]
    fixed = ~system.free
    if system.kind == SCALAR:
        h_ext = system._raw_fields(sites, (np.where(fixed, system.spin, 0.0),))
    else:
        hx, hy = system._raw_fields(sites, (np.where(fixed, system.cx, 0.0), np.where(fixed, system.sy, 0.0)))
        h_ext = np.stack([hx, hy], axis=1)
    table = system.kernel.table
    R = system.kernel.radius
    Jm = np.zeros((n, n))
    for k in range(n):
        d = sites - sites[k]
        ok = (np.abs(d[:, 0]) <= R) & (np.abs(d[:, 1]) <= R)
        ok[k] = False
        Jm[k, ok] = table[d[ok, 0] + R, d[ok, 1] + R]
    return h_ext, Jm


def _lse_accumulate(chunks):
    """Two-pass weighted sums: ``chunks()`` yields ``(log_w, payload_rows)``."""
    shift = -np.inf
    for logw, _ in chunks():
        shift = max(shift, float(logw.max()))
    Z = 0.0
    acc = None
    for logw, rows in chunks():
        w = np.exp(logw - shift)
        Z += float(w.sum())
        part = w @ rows
        acc = part if acc is None else acc + part
    return shift, Z, acc


def rectangle_system(
    model: CouplingModel,
    kernel: InteractionKernel,
    n1: int,
    n2: int,
    exterior: str = "free",
) -> LatticeSystem:
    """Free ``n1 x n2`` rectangle with corner at the origin, everything else exterior.

    ``exterior`` is ``"plus"``, ``"minus"`` or ``"free"`` (no spins at all).
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("rectangle sides must be positive")
    box = Box(max(n1, n2) - 1)
    level = "plus" if exterior == "free" else exterior
    init = homogeneous(box, model.kind, level)
    rect = [Site(a, b) for a in range(n1) for b in range(n2)]
    system = LatticeSystem(init, BoundarySpec(exterior), model, kernel, SiteSet.from_sites(box, rect))
    if exterior == "free":
        vacant = ~system.free
        system.present = system.present & ~vacant
        if system.kind == SCALAR:
            system.spin[vacant] = 0.0
        else:
            system.theta[vacant] = 0.0
            system.cx[vacant] = 0.0
            system.sy[vacant] = 0.0
    return system


def _system(config, bc, model, kernel, region):
    if isinstance(config, LatticeSystem):
        return config
    return LatticeSystem(config, bc, model, kernel, region)


def enumerate_ising(
    config: SpinConfiguration | LatticeSystem,
    bc: BoundarySpec | None = None,
    model: CouplingModel | None = None,
    kernel: InteractionKernel | None = None,
    beta: float = 1.0,
    region: SiteSet | None = None,
) -> ExactResult:
    """Exact Gibbs expectations by summing all ``2^n`` free configurations."""
    system = _system(config, bc, model, kernel, region)
    if system.kind != SCALAR:
        raise ValueError("enumerate_ising needs an Ising model")
    n = system.n_free
    if n > MAX_ISING_SITES:
        raise ValueError(f"region too large for enumeration: {n} free sites > {MAX_ISING_SITES}")
    h, Jm = free_problem(system)
    if n == 0:
        return ExactResult(1.0, 0.0, {"energy": 0.0, "magnetization": 0.0}, {})
    # states come in flip pairs (S, -S) with the last spin of S fixed to +1;
    # odd moments then cancel exactly whenever h == 0
    half = 1 << (n - 1)
    bitpos = np.arange(n, dtype=np.int64)

    def pairs():
        for start in range(0, half, _CHUNK):
            idx = np.arange(start, min(half, start + _CHUNK), dtype=np.int64) | (1 << (n - 1))
            S = (((idx[:, None] >> bitpos) & 1) * 2 - 1).astype(float)
            lin = S @ h
            quad = 0.5 * np.einsum("ij,ij->i", S @ Jm, S)
            Ep, Em = -lin - quad, lin - quad
            yield S, Ep, Em

    shift = -np.inf
    for _, Ep, Em in pairs():
        shift = max(shift, float((-beta * Ep).max()), float((-beta * Em).max()))
    Z = 0.0
    odd = np.zeros(n)
    energy = 0.0
    for S, Ep, Em in pairs():
        wp, wm = np.exp(-beta * Ep - shift), np.exp(-beta * Em - shift)
        Z += float(wp.sum() + wm.sum())
        odd += (wp - wm) @ S
        energy += float(wp @ Ep + wm @ Em)
    mean = np.concatenate([odd / Z, [energy / Z, float(odd.sum()) / Z / n]])
    labels = [site_label(s) for s in system.free_sites()]
    expectations = {lab: float(mean[k]) for k, lab in enumerate(labels)}
    expectations["energy"] = float(mean[n])
    expectations["magnetization"] = float(mean[n + 1])
    marginals = {lab: 0.5 * (1.0 + float(mean[k])) for k, lab in enumerate(labels)}
    logZ = shift + math.log(Z)
    return ExactResult(_safe_exp(logZ), logZ, expectations, marginals)


def clock_quadrature_rotator(
    config: SpinConfiguration | LatticeSystem,
    bc: BoundarySpec | None = None,
    model: CouplingModel | None = None,
    kernel: InteractionKernel | None = None,
    beta: float = 1.0,
    q: int = 64,
    region: SiteSet | None = None,
    diagnose: bool = True,
) -> ExactResult:
    """Expectations of the ``q``-state clock discretisation of the rotator.

    Angles ``2 pi k / q - pi``. When ``(2q)^n`` fits the state cap the result
    carries ``max_abs_diff_2q``, the largest change of any expectation on
    doubling ``q``.
    """
    system = _system(config, bc, model, kernel, region)
    if system.kind != PLANAR:
        raise ValueError("clock quadrature needs a rotator model")
    if q < 8:
        raise ValueError("q must be at least 8")
    n = system.n_free
    if q ** n > MAX_CLOCK_STATES:
        raise ValueError(f"state space too large: {q}^{n} > {MAX_CLOCK_STATES}")
    res = _clock(system, beta, q)
    if diagnose and (2 * q) ** n <= MAX_CLOCK_STATES:
        fine = _clock(system, beta, 2 * q)
        res.diagnostics["q"] = float(q)
        res.diagnostics["max_abs_diff_2q"] = max(
            abs(res.expectations[k] - fine.expectations[k]) for k in res.expectations
        )
    return res


def _clock(system: LatticeSystem, beta: float, q: int) -> ExactResult:
    n = system.n_free
    h, Jm = free_problem(system)
    wx, wy = system.wx, system.wy
    angles = 2.0 * np.pi * np.arange(q) / q - np.pi
    cos_t, sin_t = np.cos(angles), np.sin(angles)
    total = q ** n
    radix = q ** np.arange(n, dtype=np.int64)

    def chunks():
        for start in range(0, total, _CHUNK):
            idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
            digits = (idx[:, None] // radix) % q
            C, S = cos_t[digits], sin_t[digits]
            E = -(wx * (C @ h[:, 0]) + wy * (S @ h[:, 1]))
            E -= 0.5 * (wx * np.einsum("ij,ij->i", C @ Jm, C) + wy * np.einsum("ij,ij->i", S @ Jm, S))
            yield -beta * E, np.column_stack([S, C, E])

    shift, Z, acc = _lse_accumulate(chunks)
    mean = acc / Z
    labels = [site_label(s) for s in system.free_sites()]
    expectations = {f"sin {lab}": float(mean[k]) for k, lab in enumerate(labels)}
    expectations.update({f"cos {lab}": float(mean[n + k]) for k, lab in enumerate(labels)})
    expectations["energy"] = float(mean[2 * n])
    expectations["vertical_magnetization"] = float(np.mean(mean[:n])) if n else 0.0
    marginals = {lab: float(mean[k]) for k, lab in enumerate(labels)}
    logZ = shift + math.log(Z) - n * math.log(q)  # normalised a priori measure
    return ExactResult(_safe_exp(logZ), logZ, expectations, marginals)


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def onsager_reference(beta: float) -> float:
    """Spontaneous magnetisation of the square-lattice n.n. Ising model (J = 1)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta <= BETA_C:
        return 0.0
    s = math.sinh(2.0 * beta)
    return (1.0 - s ** -4) ** 0.125


# -- transition matrices ----------------------------------------------------------


def gibbs_vector(system: LatticeSystem, beta: float) -> np.ndarray:
    """Exact Gibbs probabilities over the ``2^n`` free configurations.

    State index bit ``k`` holds the k-th free site in sweep order (1 = +1).
    """
    h, Jm = free_problem(system)
    n = system.n_free
    idx = np.arange(1 << n, dtype=np.int64)
    S = (((idx[:, None] >> np.arange(n)) & 1) * 2 - 1).astype(float)
    E = -(S @ h) - 0.5 * np.einsum("ij,ij->i", S @ Jm, S)
    logw = -beta * E
    w = np.exp(logw - logw.max())
    return w / w.sum()


def heat_bath_site_matrices(system: LatticeSystem, beta: float) -> list[sp.csr_matrix]:
    """Sparse transition matrix of the heat-bath update of each free site."""
    h, Jm = free_problem(system)
    n = system.n_free
    if n > 12:
        raise ValueError("transition matrices are limited to 12 free sites")
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    S = (((idx[:, None] >> np.arange(n)) & 1) * 2 - 1).astype(float)
    fields = h[None, :] + S @ Jm
    mats = []
    for k in range(n):
        p_plus = np.array([heat_bath_probability(beta, f) for f in fields[:, k]])
        up = idx | (1 << k)
        down = idx & ~(1 << k)
        rows = np.concatenate([idx, idx])
        cols = np.concatenate([up, down])
        vals = np.concatenate([p_plus, 1.0 - p_plus])
        mats.append(sp.csr_matrix((vals, (rows, cols)), shape=(size, size)))
    return mats


# -- boundary sums ---------------------------------------------------------------


def boundary_energy_bruteforce(model: CouplingModel, L: int, N: int, M: int) -> float:
    """``2 sum_{x in Box(L)} sum_{y in Box(M) \\ Box(N)} J(x, y)`` by direct summation."""
    if not L < N < M:
        raise ValueError("need L < N < M")
    r = np.arange(-M, M + 1)
    Y1, Y2 = np.meshgrid(r, r, indexing="ij")
    outside = (np.abs(Y1) > N) | (np.abs(Y2) > N)
    y1, y2 = Y1[outside], Y2[outside]
    total = 0.0
    for x1 in range(-L, L + 1):
        for x2 in range(-L, L + 1):
            d1, d2 = np.abs(y1 - x1), np.abs(y2 - x2)
            total += _couplings_vec(model, d1, d2).sum()
    return 2.0 * total


def _couplings_vec(model: CouplingModel, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    out = np.zeros(d1.shape)
    f = model.family
    J = model.J
    with np.errstate(divide="ignore"):
        if f in ("NNIsing", "AnisoNNRotator"):
            out[(d1 + d2) == 1] = J
        elif f == "AxialLR":
            row = (d2 == 0) & (d1 > 0)
            out[row] = J * d1[row].astype(float) ** -model.alpha1
            out[(d1 == 0) & (d2 == 1)] = J
        elif f == "BiAxialLR":
            row = (d2 == 0) & (d1 > 0)
            col = (d1 == 0) & (d2 > 0)
            out[row] = J * d1[row].astype(float) ** -model.alpha1
            out[col] = J * d2[col].astype(float) ** -model.alpha2
        else:
            nz = (d1 + d2) > 0
            out[nz] = J * np.hypot(d1[nz], d2[nz]) ** -model.alpha1
    return out
