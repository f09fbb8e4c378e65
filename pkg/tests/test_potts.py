import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zerohot.exceptions import InputError, SizeError
from zerohot.potts import (
    CandidateSolution,
    Edge,
    PottsInstance,
    brute_force_optima,
    instance_from_dict,
    instance_to_dict,
    largest_remainder,
    load_instance,
    make_fc_ferro_potts,
    make_partitioned_candidate,
    overlap,
    potts_energy,
    random_instance,
)


@pytest.mark.parametrize(
    "N,Q,s,expected",
    [
        (4, 3, (1, 1, 1, 1), -6.0),
        (3, 3, (1, 2, 3), 0.0),
        (2, 2, (1, 1), -2.0),
    ],
)
def test_fc_energy_examples(N, Q, s, expected):
    assert potts_energy(make_fc_ferro_potts(N, Q, 1.0), s) == pytest.approx(expected, abs=1e-12)


def test_fc_tables():
    inst = make_fc_ferro_potts(4, 3, 1.0)
    assert len(inst.edges) == 6
    for e in inst.edges:
        assert e.f[1, 1] == 1.0
        assert e.f[0, 1] == 0.0
    assert np.all(inst.fields == 0)
    assert make_fc_ferro_potts(10, 4, 2.0).edges[0].f[2, 2] == pytest.approx(0.8)


@pytest.mark.parametrize("args", [(4, 3, 0.0), (4, 3, -1.0), (1, 3, 1.0), (4, 1, 1.0)])
def test_fc_rejects_bad_input(args):
    with pytest.raises(InputError):
        make_fc_ferro_potts(*args)


def test_energy_rejects_out_of_range():
    inst = make_fc_ferro_potts(3, 3)
    with pytest.raises(InputError):
        potts_energy(inst, (1, 2, 4))
    with pytest.raises(InputError):
        potts_energy(inst, (1, 2))


def test_instance_validation():
    f = np.zeros((2, 2))
    with pytest.raises(InputError):
        PottsInstance(3, 2, (Edge(2, 1, f),))
    with pytest.raises(InputError):
        PottsInstance(3, 2, (Edge(1, 2, f), Edge(1, 2, f)))
    with pytest.raises(InputError):
        PottsInstance(3, 2, (Edge(1, 2, np.zeros((3, 3))),))
    with pytest.raises(InputError):
        PottsInstance(3, 2, (), np.zeros((3, 3)))


@pytest.mark.parametrize(
    "N,Q,rho,sizes",
    [
        (4, 4, (0.25, 0.25, 0.25, 0.25), (1, 1, 1, 1)),
        (10, 4, (0.7, 0.1, 0.1, 0.1), (7, 1, 1, 1)),
        (100, 4, (0.26,) + ((1 - 0.26) / 3,) * 3, None),
    ],
)
def test_partitioned_candidate(N, Q, rho, sizes):
    c = make_partitioned_candidate(N, Q, rho)
    assert c.group_sizes.sum() == N
    if sizes is not None:
        assert tuple(c.group_sizes) == sizes
    else:
        assert c.group_sizes[0] == 26
    assert np.all(np.diff(c.r) >= 0)


def test_equal_split_is_identity():
    assert list(make_partitioned_candidate(4, 4, (0.25,) * 4).r) == [1, 2, 3, 4]


def test_partitioned_candidate_rejects_negative():
    with pytest.raises(InputError):
        make_partitioned_candidate(4, 3, (1.2, -0.1, -0.1))


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=6), st.integers(1, 200))
def test_largest_remainder_sums(weights, N):
    w = np.asarray(weights)
    if w.sum() <= 0:
        return
    rho = w / w.sum()
    sizes = largest_remainder(rho, N)
    assert sizes.sum() == N
    assert np.all(np.abs(sizes - rho * N) < 1.0 + 1e-9)


@pytest.mark.parametrize("N,Q", [(3, 2), (4, 3), (3, 4)])
def test_fc_brute_force(N, Q):
    inst = make_fc_ferro_potts(N, Q, 1.0)
    best, optima = brute_force_optima(inst)
    assert best == pytest.approx(-2.0 * (N - 1))
    assert optima == {(q,) * N for q in range(1, Q + 1)}


def _reverse_enumeration(inst):
    # last variable varies slowest: independent of the chunked vectorized order
    N, Q = inst.n_vars, inst.q_values
    best, arg = np.inf, set()
    for rev in itertools.product(range(1, Q + 1), repeat=N):
        s = rev[::-1]
        e = 0.0
        for i in range(N):
            e -= inst.fields[i, s[i] - 1]
        for edge in inst.edges:
            e -= edge.f[s[edge.i - 1] - 1, s[edge.j - 1] - 1]
        if e < best - 1e-12:
            best, arg = e, {s}
        elif abs(e - best) <= 1e-12:
            arg.add(s)
    return best, arg


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_matches_reverse_enumeration(seed):
    inst = random_instance(3, 3, np.random.default_rng(seed))
    best, opt = brute_force_optima(inst)
    best2, opt2 = _reverse_enumeration(inst)
    assert best == pytest.approx(best2, abs=1e-12)
    assert opt == opt2


def test_brute_force_size_bound():
    with pytest.raises(SizeError):
        brute_force_optima(PottsInstance(12, 5))


@pytest.mark.parametrize(
    "r,s,expected",
    [((1, 1, 2, 3), (1, 1, 1, 1), 0.5), ((1, 2, 3), (1, 2, 3), 1.0), ((1, 1), (2, 2), 0.0)],
)
def test_overlap(r, s, expected):
    c = CandidateSolution(np.array(r), 3)
    assert overlap(c, s) == expected


def test_overlap_length_mismatch():
    with pytest.raises(InputError):
        overlap(CandidateSolution(np.array([1, 2]), 2), (1, 2, 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations(range(3)))
def test_energy_label_permutation_invariance(seed, perm):
    rng = np.random.default_rng(seed)
    inst = random_instance(3, 3, rng)
    perm = np.asarray(perm)
    inv = np.argsort(perm)
    # relabel value q as perm[q]; tables move with the labels
    edges = tuple(Edge(e.i, e.j, e.f[np.ix_(inv, inv)]) for e in inst.edges)
    moved = PottsInstance(3, 3, edges, inst.fields[:, inv])
    s = rng.integers(1, 4, size=3)
    assert potts_energy(moved, perm[s - 1] + 1) == pytest.approx(potts_energy(inst, s), abs=1e-12)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=8), st.lists(st.integers(1, 4), min_size=8, max_size=8))
def test_overlap_bounds(r, s):
    c = CandidateSolution(np.array(r), 4)
    assert 0.0 <= overlap(c, s[: len(r)]) <= 1.0
    assert overlap(c, c.r) == 1.0


def test_candidate_groups():
    c = CandidateSolution(np.array([1, 1, 2, 3]), 3)
    assert c.groups == {1: (1, 2), 2: (3,), 3: (4,)}
    assert np.allclose(c.fractions, [0.5, 0.25, 0.25])


def test_json_round_trip(tmp_path):
    inst = random_instance(3, 2, np.random.default_rng(1))
    cand = CandidateSolution(np.array([1, 2, 2]), 2)
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(instance_to_dict(inst, cand)))
    back, c2 = load_instance(path)
    assert back.n_vars == 3 and back.q_values == 2
    for a, b in zip(inst.edges, back.edges):
        assert np.array_equal(a.f, b.f)
    assert np.array_equal(c2.r, cand.r)


def test_json_fc_shortcut():
    inst, cand = instance_from_dict({"n": 4, "q": 3, "J": 1.0})
    assert len(inst.edges) == 6 and cand is None


@pytest.mark.parametrize("text", ["{", "[]", '{"n": 2}', '{"n": 2, "q": 2, "edges": [{"i": 1}]}'])
def test_json_malformed(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(InputError):
        load_instance(path)
