"""Sweep and local-field kernels, in numba and pure-numpy flavours.

All kernels work on a padded grid: ``sites`` holds the grid indices of the
updatable sites in sweep order and every ``site + offset`` is in-grid.
Vacant grid cells carry value 0 (Ising) or the zero vector (rotators), so
they drop out of every field sum.

Random slots: Ising sweeps use counter ``ctr0 + k`` for the k-th site;
rotator sweeps use ``ctr0 + 2k`` (proposal) and ``ctr0 + 2k + 1``
(acceptance). Both backends consume identical streams.
"""
from __future__ import annotations

import math
from types import SimpleNamespace

import numpy as np

from . import rng
from ._backend import BACKENDS, njit, selected_backend

TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------


@njit
def _heat_bath_p_plus(x):
    # P(+1) = 1 / (1 + exp(-x)), evaluated without overflow
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit
def ising_fields_nb(spin, sites, off, w):
    n = sites.shape[0]
    m = w.shape[0]
    out = np.empty(n)
    for k in range(n):
        a = sites[k, 0]
        b = sites[k, 1]
        h = 0.0
        for t in range(m):
            h += w[t] * spin[a + off[t, 0], b + off[t, 1]]
        out[k] = h
    return out


@njit
def ising_sweep_nb(spin, sites, off, w, beta, key, ctr0):
    n = sites.shape[0]
    m = w.shape[0]
    for k in range(n):
        a = sites[k, 0]
        b = sites[k, 1]
        h = 0.0
        for t in range(m):
            h += w[t] * spin[a + off[t, 0], b + off[t, 1]]
        u = rng.uniform_nb(key, ctr0 + np.uint64(k))
        if u < _heat_bath_p_plus(2.0 * beta * h):
            spin[a, b] = 1.0
        else:
            spin[a, b] = -1.0


@njit
def rotator_fields_nb(cx, sy, sites, off, w):
    n = sites.shape[0]
    m = w.shape[0]
    hx = np.empty(n)
    hy = np.empty(n)
    for k in range(n):
        a = sites[k, 0]
        b = sites[k, 1]
        fx = 0.0
        fy = 0.0
        for t in range(m):
            p = a + off[t, 0]
            q = b + off[t, 1]
            fx += w[t] * cx[p, q]
            fy += w[t] * sy[p, q]
        hx[k] = fx
        hy[k] = fy
    return hx, hy


@njit
def rotator_sweep_nb(theta, cx, sy, sites, off, w, wx, wy, beta, width, key, ctr0):
    n = sites.shape[0]
    m = w.shape[0]
    accepted = 0
    for k in range(n):
        a = sites[k, 0]
        b = sites[k, 1]
        fx = 0.0
        fy = 0.0
        for t in range(m):
            p = a + off[t, 0]
            q = b + off[t, 1]
            fx += w[t] * cx[p, q]
            fy += w[t] * sy[p, q]
        slot = ctr0 + np.uint64(2 * k)
        u1 = rng.uniform_nb(key, slot)
        u2 = rng.uniform_nb(key, slot + np.uint64(1))
        new = theta[a, b] + (2.0 * u1 - 1.0) * width
        if new > math.pi:
            new -= TWO_PI
        elif new <= -math.pi:
            new += TWO_PI
        c = math.cos(new)
        s = math.sin(new)
        dE = -(wx * fx * (c - cx[a, b]) + wy * fy * (s - sy[a, b]))
        if dE <= 0.0 or u2 < math.exp(-beta * dE):
            theta[a, b] = new
            cx[a, b] = c
            sy[a, b] = s
            accepted += 1
    return accepted


# --------------------------------------------------------------------------
# numpy
# --------------------------------------------------------------------------


def _p_plus(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def ising_fields_np(spin, sites, off, w):
    rows = sites[:, 0:1] + off[:, 0]
    cols = sites[:, 1:2] + off[:, 1]
    return spin[rows, cols] @ w


def ising_sweep_np(spin, sites, off, w, beta, key, ctr0):
    u = rng.uniforms(int(key), int(ctr0), sites.shape[0])
    o1, o2 = off[:, 0], off[:, 1]
    for k in range(sites.shape[0]):
        a, b = sites[k]
        h = float(spin[a + o1, b + o2] @ w)
        spin[a, b] = 1.0 if u[k] < _p_plus(2.0 * beta * h) else -1.0


def rotator_fields_np(cx, sy, sites, off, w):
    rows = sites[:, 0:1] + off[:, 0]
    cols = sites[:, 1:2] + off[:, 1]
    return cx[rows, cols] @ w, sy[rows, cols] @ w


def rotator_sweep_np(theta, cx, sy, sites, off, w, wx, wy, beta, width, key, ctr0):
    n = sites.shape[0]
    u = rng.uniforms(int(key), int(ctr0), 2 * n)
    o1, o2 = off[:, 0], off[:, 1]
    accepted = 0
    for k in range(n):
        a, b = sites[k]
        rows, cols = a + o1, b + o2
        fx = float(cx[rows, cols] @ w)
        fy = float(sy[rows, cols] @ w)
        new = theta[a, b] + (2.0 * u[2 * k] - 1.0) * width
        if new > math.pi:
            new -= TWO_PI
        elif new <= -math.pi:
            new += TWO_PI
        c, s = math.cos(new), math.sin(new)
        dE = -(wx * fx * (c - cx[a, b]) + wy * fy * (s - sy[a, b]))
        if dE <= 0.0 or u[2 * k + 1] < math.exp(-beta * dE):
            theta[a, b] = new
            cx[a, b] = c
            sy[a, b] = s
            accepted += 1
    return accepted


_TABLE = {
    "numba": SimpleNamespace(
        name="numba",
        ising_fields=ising_fields_nb,
        ising_sweep=ising_sweep_nb,
        rotator_fields=rotator_fields_nb,
        rotator_sweep=rotator_sweep_nb,
    ),
    "numpy": SimpleNamespace(
        name="numpy",
        ising_fields=ising_fields_np,
        ising_sweep=ising_sweep_np,
        rotator_fields=rotator_fields_np,
        rotator_sweep=rotator_sweep_np,
    ),
}


def get_kernels(name: str | None = None) -> SimpleNamespace:
    """Kernel set by name, defaulting to the environment-selected backend."""
    name = selected_backend() if name is None else name
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    return _TABLE[name]
