import numpy as np
import pytest

from conftest import build
from oracles import random_raw_system
from isingmin.exact import branch_and_bound
from isingmin.lattice import generate_lattice
from isingmin.local import (derive_seed, local_search, multi_start, run_pass, run_starts)
from isingmin.model import SpinSystem, energy, flip_delta, random_configuration


def _prefix_min(trace):
    energies = np.concatenate([[trace.start_energy], trace.running])
    return energies.min()


def test_pass_from_ground_state_keeps_start():
    s = SpinSystem(2, edges=[((0, 1), 1.0)])
    cfg, e, trace = run_pass(s, [1, 1])
    assert trace.best_prefix_length == 0 and e == -1.0
    assert list(cfg) == [1, 1]
    assert len(trace.moves) == 2


def test_separable_instance_solved_in_one_pass():
    h = np.array([0.5, -1.0, 2.0, -0.25, 0.75])
    s = SpinSystem(5, h=h)
    rep = local_search(s, [1, 1, -1, 1, -1])
    assert rep.best_energy == -np.abs(h).sum()
    assert rep.extra["pass_energies"][1] == rep.best_energy


def test_three_passes_improve_on_1024_spin_lattice():
    s = generate_lattice((32, 32), 2, "bimodal", seed=0)
    cfg = random_configuration(s, 0)
    e = energy(s, cfg)
    seen = [e]
    for _ in range(3):
        cfg, e, _ = run_pass(s, cfg, e)
        seen.append(e)
    assert seen[0] > seen[1] > seen[2] > seen[3]


@pytest.mark.property
def test_pass_trace_bookkeeping():
    rng = np.random.default_rng(30)
    for trial in range(300):
        raw = random_raw_system(rng, n_max=14, integer=bool(trial % 2))
        s = build(raw, clamped={0: 1} if trial % 5 == 0 else None)
        cfg0 = random_configuration(s, trial)
        cfg, e, tr = run_pass(s, cfg0)
        assert len(tr.moves) == s.num_free
        assert sorted(tr.moves) == list(s.free_spins)
        run = tr.start_energy - np.cumsum(tr.gains)
        if s.is_integral:
            assert np.array_equal(run, tr.running)
        else:
            assert np.allclose(run, tr.running, atol=1e-9)
        # re-evaluate the move sequence from scratch
        c = cfg0.copy()
        for k, spin in enumerate(tr.moves):
            c[spin] = -c[spin]
            assert energy(s, c) == pytest.approx(tr.running[k], rel=1e-6, abs=1e-9)
        assert e == pytest.approx(_prefix_min(tr), abs=1e-9)
        assert e == energy(s, cfg)
        assert e <= tr.start_energy


@pytest.mark.property
def test_pair_kernel_matches_general_kernel():
    rng = np.random.default_rng(31)
    for trial in range(60):
        dims = tuple(int(d) for d in rng.integers(3, 9, size=2))
        dist = ("gaussian", "bimodal")[trial % 2]
        s = generate_lattice(dims, int(rng.integers(0, 3)), dist,
                             ("zero", "gaussian")[trial % 3 == 0], seed=trial)
        cfg = random_configuration(s, trial)
        a = run_pass(s, cfg)
        b = run_pass(s, cfg, _force_general=True)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]
        assert np.array_equal(a[2].moves, b[2].moves)
        assert np.array_equal(a[2].gains, b[2].gains)


def test_local_search_is_one_flip_optimal_and_monotone():
    for seed in range(10):
        s = generate_lattice((7, 7), 2, "gaussian", seed=seed)
        rep = local_search(s, random_configuration(s, seed))
        for i in range(s.num_spins):
            assert flip_delta(s, rep.best_config, i) >= -1e-12
        hist = rep.extra["pass_energies"]
        assert all(a > b for a, b in zip(hist, hist[1:]))
        assert rep.best_energy == energy(s, rep.best_config)


def test_local_search_near_optimum_on_7x7():
    single = multi = 0
    for seed in range(10):
        s = generate_lattice((7, 7), 0, "gaussian", seed=100 + seed)
        opt = branch_and_bound(s).best_energy
        one = local_search(s, random_configuration(s, seed)).best_energy
        many = multi_start(s, 16, seed)[0].best_energy
        assert one >= opt - 1e-9 and many >= opt - 1e-9
        single += one - opt <= 0.05 * abs(opt)
        multi += many - opt <= 0.05 * abs(opt)
    # one start is reliably close only most of the time; sixteen nearly always
    assert single >= 5
    assert multi >= 9


def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, 1) == derive_seed(0, 1)
    assert len({derive_seed(0, k) for k in range(100)} | {derive_seed(1, 0)}) == 101


def test_single_start_equals_local_search():
    s = generate_lattice((6, 6), 1, "gaussian", seed=5)
    rep, samples = multi_start(s, 1, seed=9)
    ref = local_search(s, random_configuration(s, derive_seed(9, 0)))
    assert rep.best_energy == ref.best_energy == samples[0].energy
    assert np.array_equal(rep.best_config, ref.best_config)


def test_multi_start_nested_prefixes_nonincreasing():
    s = generate_lattice((8, 8), 2, "bimodal", seed=1)
    best = [multi_start(s, k, seed=3)[0].best_energy for k in (1, 2, 4, 8, 16)]
    assert all(a >= b for a, b in zip(best, best[1:]))


def test_multi_start_independent_of_workers():
    s = generate_lattice((10, 10), 2, "gaussian", seed=2)
    a = run_starts(s, 24, seed=4, max_workers=1)
    b = run_starts(s, 24, seed=4, max_workers=4)
    assert [x.energy for x, _ in a] == [y.energy for y, _ in b]
    assert [x.seed for x, _ in a] == [y.seed for y, _ in b]
    ra, _ = multi_start(s, 24, 4, 1)
    rb, _ = multi_start(s, 24, 4, 3)
    assert np.array_equal(ra.best_config, rb.best_config)


def test_multi_start_rejects_zero_starts():
    with pytest.raises(ValueError):
        multi_start(SpinSystem(2), 0, 0)
