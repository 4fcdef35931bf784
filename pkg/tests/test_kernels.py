import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oa_spacefill import kernels as K


def test_bounded_matches_big_integer_floor():
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2**63, size=2000, dtype=np.uint64) * np.uint64(2) + rng.integers(0, 2, size=2000, dtype=np.uint64)
    for bound in (1, 2, 3, 7, 18, 25, 1000, 10**6, 2**36 - 1):
        got = K.bounded_np(u, bound)
        want = [((int(v) >> 11) * bound) >> 53 for v in u]
        assert got.tolist() == want
        assert got.max() < bound


def test_bounded_jit_matches_numpy():
    keys = K.key_np(1, np.arange(50), K.PERM)
    words = K.draw_np(keys, 3)
    for bound in (2, 25, 10**6):
        jit = [int(K.bounded_jit(np.uint64(w), np.uint64(bound))) for w in words]
        assert jit == K.bounded_np(words, bound).tolist()


def test_unit_interval_half_open():
    assert K.unit_np(np.uint64(0)) == 0.0
    assert K.unit_np(np.uint64(2**64 - 1)) < 1.0


@pytest.mark.parametrize("a", [1, 2, 5, 18, 257])
def test_permutation_paths_bit_identical(a):
    keys = K.key_np(99, np.arange(40), K.PERM)
    jit = K.permutations_jit(keys, a)
    ref = K.permutations_np(keys, a)
    assert np.array_equal(jit, ref)
    assert np.array_equal(np.sort(ref, axis=1), np.tile(np.arange(a), (40, 1)))


@pytest.mark.parametrize("udesign", [False, True])
def test_oa_design_paths_bit_identical(oa25, table1, udesign):
    streams = np.arange(64, dtype=np.uint64) * np.uint64(7919)
    for oa in (table1, oa25):
        pos = oa.alpha_positions()
        a = K.oa_designs_jit(oa.entries, oa.levels, np.uint64(5), streams, udesign, pos)
        b = K.oa_designs_np(oa.entries, oa.levels, np.uint64(5), streams, udesign, pos)
        assert np.array_equal(a, b)


def test_lhs_and_iid_paths_bit_identical():
    streams = np.arange(10, dtype=np.uint64)
    assert np.array_equal(K.lhs_designs_jit(37, 3, np.uint64(2), streams),
                          K.lhs_designs_np(37, 3, np.uint64(2), streams))
    assert np.array_equal(K.iid_points_jit(11, 4, np.uint64(2), streams),
                          K.iid_points_np(11, 4, np.uint64(2), streams))


def test_first_agreement_paths_agree(table1):
    H = table1.entries
    dup = np.vstack([H, H[5]])
    for M, limit in ((H, 2), (dup, 2), (H, 1), (H, 0)):
        assert K.first_agreement_jit(M, limit) == K.first_agreement_np(M, limit, block=4)


@settings(max_examples=200, deadline=None)
@given(c=st.integers(0, 10**6), extra=st.integers(1, 50), eta=st.floats(0, 1, exclude_max=True))
def test_place_lands_in_cell(c, extra, eta):
    q = extra
    z = (c // q + 1 + extra) * q
    x = K.place_np(np.array([c]), z, q, np.array([eta]))[0]
    assert 0 <= x < 1
    assert np.floor(x * z) == c
    assert np.floor(x * (z // q)) == c // q
    assert K._place_jit(c, z, q, eta) == x


def test_place_nudges_top_of_cell():
    eta = np.nextafter(1.0, 0.0)
    for z, c in ((3, 2), (25, 24), (18, 17), (10**6, 10**6 - 1)):
        x = K.place_np(np.array([c]), z, 1, np.array([eta]))[0]
        assert x < 1.0 and np.floor(x * z) == c


def test_key_families_distinct():
    keys = {int(K.key_np(1, 0, fam, a, b)) for fam, a, b in itertools.product(range(1, 7), range(4), range(4))}
    assert len(keys) == 6 * 16


def test_env_flag_selects_numpy_path():
    import os
    import subprocess
    import sys
    code = "from oa_spacefill import kernels; print(kernels.USE_JIT)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env=dict(os.environ, OA_SPACEFILL_NO_JIT="1")).stdout.strip()
    assert out == "False"
