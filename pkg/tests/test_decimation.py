import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from decimation_mc.config import SpinConfiguration, alternating_ising, homogeneous
from decimation_mc.couplings import CouplingModel, build_kernel
from decimation_mc.decimation import (
    CSV_HEADER,
    GapReport,
    alternating_decorated_system,
    bad_vs_good_scan,
    decimate,
    discontinuity_probe,
    image_configuration,
    limit_shift,
    preimage_freeze,
)
from decimation_mc.estimates import Estimate
from decimation_mc.lattice import ORIGIN, Box, Site, even_sublattice
from decimation_mc.oracle import enumerate_ising
from decimation_mc.sampler import ChainSpec, constrained_system

NN = CouplingModel("NN")
NNK = build_kernel(NN, 1)
FAST = ChainSpec(2000, 200, 1)


def test_decimate_example():
    c = homogeneous(Box(4), "scalar", "plus")
    c[Site(2, 4)] = -1
    d = decimate(c)
    assert d.L == 2 and d[Site(1, 2)] == -1


def test_decimate_all_plus():
    d = decimate(homogeneous(Box(6), "scalar", "plus"))
    assert d.L == 3 and np.all(d.values == 1)


def test_decimate_odd_window_truncates():
    c = alternating_ising(Box(5))
    d = decimate(c)
    assert d.L == 2
    assert all(d[s] == c[Site(2 * s.i1, 2 * s.i2)] for s in d.box)


@given(arrays(np.int8, (9, 9), elements=st.sampled_from([-1, 1])))
def test_decimate_shift_covariance(vals):
    c = SpinConfiguration("scalar", Box(4), vals)
    lhs = decimate(c.shifted((2, 0)))
    rhs = decimate(c).shifted((1, 0))
    # overlap where the shifted window had real data
    for s in lhs.box:
        if Site(s.i1 - 1, s.i2) in lhs.box:
            assert lhs[s] == rhs[s]


@given(
    arrays(np.int8, (5, 5), elements=st.sampled_from([-1, 1])),
    arrays(np.int8, (9, 9), elements=st.sampled_from([-1, 1])),
)
def test_decimate_inverts_preimage(image_vals, fill):
    image = SpinConfiguration("scalar", Box(2), image_vals)
    pre = preimage_freeze(image, Box(4))
    even = even_sublattice(Box(4)).mask
    pre.values[~even] = fill[~even]
    assert np.array_equal(decimate(pre).values, image.values)


def test_preimage_freeze_alternating():
    pre = preimage_freeze(alternating_ising(Box(2)), Box(4))
    assert pre[Site(2, 0)] == -1 and pre.frozen[pre.box.index(Site(2, 0))]
    assert not pre.frozen[pre.box.index(ORIGIN)]
    assert pre[Site(1, 1)] == 1


def test_preimage_freeze_all_plus():
    pre = preimage_freeze(homogeneous(Box(2), "scalar", "plus"), Box(4))
    even = even_sublattice(Box(4)).mask.copy()
    even[pre.box.index(ORIGIN)] = False
    assert np.array_equal(pre.frozen, even)
    assert np.all(pre.values[even] == 1)


def test_preimage_needs_covering_image():
    with pytest.raises(ValueError):
        preimage_freeze(alternating_ising(Box(1)), Box(4))


def test_image_configuration():
    img = image_configuration("scalar", 1, 3, "minus")
    assert img[Site(1, 0)] == -1 and img[ORIGIN] == 1
    assert img[Site(3, 3)] == -1 and img[Site(2, 0)] == -1
    rot = image_configuration("planar", 1, 2, "plus")
    assert rot[Site(2, 0)] == pytest.approx(math.pi / 2)
    assert rot[Site(0, 1)] == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        image_configuration("scalar", 2, 2, "plus")


@given(arrays(np.int8, (9, 9), elements=st.sampled_from([-1, 1])))
def test_alternating_pinned_energy_flip_symmetric(vals):
    system = alternating_decorated_system(NN, NNK, 2)
    sites = system.sites - system.pad
    sigma = vals[sites[:, 0], sites[:, 1]].astype(float)
    system.set_free_values(sigma)
    e1 = system.energy()
    system.set_free_values(-sigma)
    assert system.energy() == e1


def test_gap_report():
    r = GapReport(Estimate(0.9, 0.03, 1.0, 100), Estimate(-0.9, 0.04, 1.0, 100), {"family": "NNIsing", "L": 4})
    assert r.gap == pytest.approx(1.8)
    assert r.significance == pytest.approx(1.8 / 0.05)
    assert len(r.csv_row().split(",")) == len(CSV_HEADER.split(","))
    zero = GapReport(Estimate(1.0, 0.0, 0.5, 10), Estimate(1.0, 0.0, 0.5, 10))
    assert zero.significance == 0.0


def _exact_side(side, beta, L=0, N=1):
    frozen = preimage_freeze(image_configuration("scalar", L, N, side), Box(2 * N))
    return enumerate_ising(constrained_system(frozen, NN, NNK), beta=beta).expectations["site(0,0)"]


def test_exact_gap_zero_at_beta_zero():
    assert _exact_side("plus", 0.0) == 0.0
    assert _exact_side("minus", 0.0) == 0.0


def test_probe_matches_exact_gap():
    beta = 0.9
    exact = _exact_side("plus", beta) - _exact_side("minus", beta)
    r = discontinuity_probe(NN, beta, 0, 1, chain_spec=ChainSpec(6000, 300, 2), replicas=4)
    assert abs(r.gap - exact) < 3 * r.combined_error
    assert exact > 0


def test_probe_beta_zero():
    r = discontinuity_probe(NN, 0.0, 1, 2, chain_spec=FAST, replicas=4)
    assert abs(r.significance) < 3


def test_probe_swapped_sides():
    a = discontinuity_probe(NN, 0.9, 1, 2, chain_spec=FAST, replicas=4)
    b = discontinuity_probe(NN, 0.9, 1, 2, chain_spec=FAST.with_seed(100), replicas=4, sides=("minus", "plus"))
    assert abs(a.gap + b.gap) < 3 * math.hypot(a.combined_error, b.combined_error)


def test_probe_is_deterministic_and_worker_independent():
    a = discontinuity_probe(NN, 0.9, 1, 2, chain_spec=FAST, replicas=3, workers=1)
    b = discontinuity_probe(NN, 0.9, 1, 2, chain_spec=FAST, replicas=3, workers=3)
    assert a.csv_row() == b.csv_row()


def test_probe_validation():
    with pytest.raises(ValueError):
        discontinuity_probe(NN, 1.0, 3, 3)
    with pytest.raises(ValueError):
        discontinuity_probe(NN, -1.0, 1, 2)


def test_probe_warns_on_small_annulus():
    m = CouplingModel("I3", alpha1=3.0)
    with pytest.warns(UserWarning, match="boundary-energy bound"):
        discontinuity_probe(m, 0.1, 1, 2, chain_spec=ChainSpec(10, 0, 0), replicas=1, kernel=build_kernel(m, 2))


def test_scan_rows_and_control():
    rows = bad_vs_good_scan(NN, 0.9, [1, 2], "fixed_ratio", ChainSpec(500, 50, 0), replicas=2)
    assert [(r["L"], r["image"]) for r in rows] == [(1, "alternating"), (1, "control"), (2, "alternating"), (2, "control")]
    assert all(r["N"] > r["L"] for r in rows)
    with pytest.raises(ValueError):
        bad_vs_good_scan(NN, 0.9, [])


def test_scan_flags_halving(monkeypatch):
    import decimation_mc.decimation as dec

    gaps = {(2, "alternating"): 1.0, (4, "alternating"): 0.4, (6, "alternating"): 0.3}

    def fake_probe(model, beta, L, N, *args, image="alternating", **kw):
        g = gaps.get((L, image), 0.0)
        return GapReport(Estimate(g, 0.01, 1.0, 10), Estimate(0.0, 0.01, 1.0, 10))

    monkeypatch.setattr(dec, "discontinuity_probe", fake_probe)
    rows = dec.bad_vs_good_scan(NN, 1.0, [2, 4, 6], "fixed_ratio")
    flags = {(r["L"], r["image"]): r["gap_halved"] for r in rows}
    assert flags[(4, "alternating")] and not flags[(6, "alternating")]
    assert not flags[(2, "alternating")] and not flags[(4, "control")]


def test_limit_shift_runs():
    a, b, d = limit_shift(NN, 0.9, 1, 2, "plus", ChainSpec(500, 50, 0))
    assert d == pytest.approx(b.mean - a.mean)
