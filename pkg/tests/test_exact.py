import numpy as np
import pytest

from conftest import build, ferro_pair, triangle
from oracles import brute_min_completion, brute_minimum, energy_raw, random_raw_system
from isingmin.exact import (MAX_EXHAUSTIVE_SPINS, BnbOptions, branch_and_bound, branching_order,
                            dominance_check, exhaustive_ground_state, greedy_initial,
                            ground_states)
from isingmin.factoring import encode_direct
from isingmin.lattice import generate_lattice
from isingmin.model import SpinSystem, energy


# -- exhaustive ---------------------------------------------------------------------


def test_exhaustive_tie_goes_to_lexicographically_smallest():
    rep = exhaustive_ground_state(ferro_pair())
    assert rep.best_energy == -1.0 and list(rep.best_config) == [-1, -1]
    assert rep.proven_optimal and rep.nodes_explored == 4


def test_exhaustive_triangle_and_factoring_21():
    assert exhaustive_ground_state(triangle()).best_energy == -1.0
    assert exhaustive_ground_state(encode_direct(21, 2, 3).system).best_energy == 0.0


def test_exhaustive_respects_clamps_and_limit():
    s = SpinSystem(3, h=[1.0, 1.0, 1.0], clamped={1: -1})
    rep = exhaustive_ground_state(s)
    assert list(rep.best_config) == [1, -1, 1] and rep.best_energy == -1.0
    with pytest.raises(ValueError):
        exhaustive_ground_state(SpinSystem(MAX_EXHAUSTIVE_SPINS + 1))
    # clamped spins do not count towards the limit
    big = SpinSystem(MAX_EXHAUSTIVE_SPINS + 1, clamped={0: 1})
    assert big.num_free == MAX_EXHAUSTIVE_SPINS


def test_exhaustive_matches_brute_force():
    rng = np.random.default_rng(40)
    for _ in range(150):
        raw = random_raw_system(rng, n_max=10)
        s = build(raw)
        want = brute_minimum(raw[1], raw[2], raw[3], raw[0])
        assert exhaustive_ground_state(s).best_energy == pytest.approx(want, abs=1e-9)


def test_ground_states_lists_all_minima_in_order():
    gs = ground_states(ferro_pair())
    assert gs.tolist() == [[-1, -1], [1, 1]]
    s = SpinSystem(3, edges=[((0, 1), -1.0), ((1, 2), -1.0), ((0, 2), -1.0)])
    assert len(ground_states(s)) == 6


# -- greedy -------------------------------------------------------------------------


def test_greedy_examples():
    cfg, e = greedy_initial(SpinSystem(1, h=[1.0]))
    assert list(cfg) == [1] and e == -1.0
    cfg, e = greedy_initial(SpinSystem(1, h=[-1.0]))
    assert list(cfg) == [-1]
    chain = SpinSystem(3, edges=[((0, 1), 1.0), ((1, 2), 1.0)])
    cfg, e = greedy_initial(chain)
    assert len(set(cfg)) == 1 and e == -2.0


def test_greedy_is_an_upper_bound():
    rng = np.random.default_rng(41)
    for _ in range(30):
        raw = random_raw_system(rng, n_max=15)
        s = build(raw)
        _, e = greedy_initial(s)
        assert e >= exhaustive_ground_state(s).best_energy - 1e-9


# -- branch and bound ------------------------------------------------------------


def test_bnb_options_validation():
    with pytest.raises(ValueError):
        BnbOptions(branching_order="random")
    with pytest.raises(ValueError):
        BnbOptions(node_limit=0)
    with pytest.raises(ValueError):
        BnbOptions(time_limit=-1.0)


def test_branching_order():
    s = SpinSystem(4, edges=[((0, 3), 1.0), ((1, 3), 1.0), ((2, 3), 1.0), ((0, 1), 1.0)],
                   clamped={2: 1})
    assert list(branching_order(s, "index")) == [0, 1, 3]
    assert list(branching_order(s, "degree_desc")) == [3, 0, 1]


def test_bnb_factoring_21():
    enc = encode_direct(21, 2, 3)
    rep = branch_and_bound(enc.system)
    assert rep.best_energy == 0.0 and rep.proven_optimal


def test_bnb_trivial_systems():
    assert branch_and_bound(SpinSystem(0)).best_energy == 0.0
    s = SpinSystem(2, h=[1.0, -2.0], clamped={0: 1, 1: 1})
    rep = branch_and_bound(s)
    assert rep.best_energy == 1.0 and rep.proven_optimal


@pytest.mark.property
@pytest.mark.parametrize("dominance", [True, False])
@pytest.mark.parametrize("order", ["degree_desc", "index"])
def test_bnb_matches_brute_force(dominance, order):
    rng = np.random.default_rng(42 + dominance + 2 * (order == "index"))
    for trial in range(120):
        raw = random_raw_system(rng, n_max=11)
        clamped = {0: -1} if trial % 7 == 0 else None
        s = build(raw, clamped)
        want = brute_minimum(raw[1], raw[2], raw[3], raw[0], clamped)
        rep = branch_and_bound(s, BnbOptions(use_dominance=dominance, branching_order=order))
        assert rep.proven_optimal
        assert rep.best_energy == pytest.approx(want, abs=1e-9)
        assert rep.best_energy == energy(s, rep.best_config)


def test_incumbents_strictly_decrease():
    for seed in range(10):
        s = generate_lattice((5, 5), 2, "gaussian", "gaussian", seed=seed)
        rep = branch_and_bound(s)
        seq = [rep.extra["initial_energy"], *rep.extra["incumbents"]]
        assert all(a > b for a, b in zip(seq, seq[1:]))
        assert seq[-1] == rep.best_energy


def _oracle_bound(raw, values):
    """offset - sum|J| - sum|h|, raised by 2|w| for every fixed unsatisfied term."""
    n, h, edges, offset = raw
    merged = {}
    for members, J in edges:
        key = tuple(sorted(members))
        merged[key] = merged.get(key, 0.0) + J
    lb = offset - sum(abs(J) for J in merged.values()) - sum(abs(x) for x in h)
    for i in range(n):
        if values[i] != 0 and h[i] * values[i] < 0:
            lb += 2 * abs(h[i])
    for members, J in merged.items():
        if all(values[i] != 0 for i in members) and J * np.prod([values[i] for i in members]) < 0:
            lb += 2 * abs(J)
    return lb


@pytest.mark.property
def test_bound_is_exact_and_valid_at_every_node():
    rng = np.random.default_rng(43)
    nodes = 0
    for _ in range(60):
        raw = random_raw_system(rng, n_max=9, integer=True)
        s = build(raw)
        rep = branch_and_bound(s, trace_nodes=400)
        vals, lbs, _ = rep.extra["trace"]
        for v, lb in zip(vals, lbs):
            assert lb == _oracle_bound(raw, v)
            assert lb <= brute_min_completion(raw[1], raw[2], raw[3], v) + 1e-9
            nodes += 1
    assert nodes > 1000


def _local_energy(s, values, i):
    total = s.h[i] * values[i]
    for e in s.incident_edges(i):
        members, J = s.edge(e)
        total += J * np.prod([values[j] for j in members])
    return total


@pytest.mark.property
def test_settled_spins_keep_their_local_energy():
    """Once a spin and all its neighbours are assigned, later assignments in
    the same branch leave its local energy terms untouched."""
    checked = 0
    for seed in range(12):
        s = generate_lattice((4, 4), 2, "gaussian", "gaussian", seed=seed)
        rep = branch_and_bound(s, BnbOptions(use_dominance=False), trace_nodes=3000)
        vals = rep.extra["trace"][0]
        for a, b in zip(vals, vals[1:]):
            assigned = a != 0
            if not np.array_equal(b[assigned], a[assigned]) or (b != 0).sum() <= assigned.sum():
                continue  # b is not a child of a
            for i in np.flatnonzero(assigned):
                if all(a[j] != 0 for j in s.neighbors(i)):
                    assert _local_energy(s, a, i) == _local_energy(s, b, i)
                    checked += 1
    assert checked > 1000


def test_dominance_never_fires_with_empty_settled_set():
    s = generate_lattice((5, 5), 0, "gaussian", seed=0)
    partial = np.zeros(25, dtype=np.int8)
    partial[12] = 1
    assert not dominance_check(s, partial, 12)
    partial[7] = -1
    assert not dominance_check(s, partial, 7)


def test_dominance_prunes_spin_against_aligned_neighbours():
    s = generate_lattice((3, 3), 0, "bimodal", seed=0)
    ferro = SpinSystem(9, edges=[(m, 1.0) for m, _ in s.edges()])
    partial = np.zeros(9, dtype=np.int8)
    for j in (1, 3, 5, 7):
        partial[j] = 1
    partial[4] = -1
    assert dominance_check(ferro, partial, 4)
    partial[4] = 1
    assert not dominance_check(ferro, partial, 4)


def test_dominance_breaks_symmetric_tie_one_way():
    s = SpinSystem(2)
    assert dominance_check(s, np.array([1, 0], np.int8), 0)
    assert not dominance_check(s, np.array([-1, 0], np.int8), 0)


def test_dominance_check_argument_errors():
    s = ferro_pair()
    with pytest.raises(ValueError):
        dominance_check(s, [1], 0)
    with pytest.raises(ValueError):
        dominance_check(s, [0, 1], 0)


def test_dominance_preserves_optimum_and_prunes():
    for seed in range(6):
        s = generate_lattice((5, 5), 2, "bimodal", seed=seed)
        on = branch_and_bound(s)
        off = branch_and_bound(s, BnbOptions(use_dominance=False))
        assert on.best_energy == off.best_energy
        assert on.dominance_prunes > 0 and off.dominance_prunes == 0
        assert on.nodes_explored < off.nodes_explored


def test_node_limit_returns_best_so_far():
    s = generate_lattice((8, 8), 2, "gaussian", seed=0)
    rep = branch_and_bound(s, BnbOptions(node_limit=500))
    assert not rep.proven_optimal
    assert rep.nodes_explored <= 500
    assert rep.best_energy == energy(s, rep.best_config)
    assert rep.best_energy <= rep.extra["initial_energy"]


def test_time_limit_stops_search():
    s = generate_lattice((10, 10), 2, "gaussian", seed=0)
    rep = branch_and_bound(s, BnbOptions(time_limit=0.2), chunk=1000)
    assert not rep.proven_optimal
    assert rep.wall_time < 5.0


def test_resumable_chunks_give_same_search():
    s = generate_lattice((5, 5), 2, "gaussian", seed=1)
    a = branch_and_bound(s)
    b = branch_and_bound(s, chunk=7)
    assert a.nodes_explored == b.nodes_explored
    assert np.array_equal(a.best_config, b.best_config)


def test_raw_oracle_agrees_with_energy():
    rng = np.random.default_rng(44)
    raw = random_raw_system(rng, n_max=8)
    s = build(raw)
    rep = branch_and_bound(s)
    assert rep.best_energy == pytest.approx(energy_raw(raw[1], raw[2], raw[3], rep.best_config))
