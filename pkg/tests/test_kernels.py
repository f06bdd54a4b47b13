"""The two search kernels must agree with each other and with brute force."""
import os
import random

import pytest

from drskit.metrics import _matchcore_py
from drskit.metrics.kernel import COMPILED, KERNEL_NAME
from oracles import oracle_solve_problem

try:
    from drskit.metrics import _matchcore
except ImportError:
    _matchcore = None

needs_compiled = pytest.mark.skipif(
    _matchcore is None, reason="compiled kernel not built")


def random_problem(rng, contract=True, max_pred=5, max_gold=5, max_pairs=10):
    """A raw kernel problem. With ``contract`` the encoding obeys what the
    hill climber assumes (per-pair functional and injective constraints,
    candidates covering every constrained gold id); without it the arrays
    are arbitrary, which only the exact path must tolerate."""
    n_pred = rng.randint(0, max_pred)
    n_gold = rng.randint(0, max_gold)
    pair_offsets, pair_pred, pair_gold = [0], [], []
    cand_sets = [set() for _ in range(n_pred)]
    if n_pred and n_gold:
        for _ in range(rng.randint(0, max_pairs)):
            size = rng.randint(0, min(3, n_pred, n_gold))
            if contract:
                ps = rng.sample(range(n_pred), size)
                gs = rng.sample(range(n_gold), size)
            else:
                ps = [rng.randrange(n_pred) for _ in range(size)]
                gs = [rng.randrange(n_gold) for _ in range(size)]
            for p, g in zip(ps, gs):
                pair_pred.append(p)
                pair_gold.append(g)
                cand_sets[p].add(g)
            pair_offsets.append(len(pair_pred))
    if not contract:
        # candidate lists may also disagree with the constraints
        for p in range(n_pred):
            if rng.random() < 0.3 and cand_sets[p]:
                cand_sets[p].pop()
    cand_offsets, cand_gold = [0], []
    for s in cand_sets:
        cand_gold.extend(sorted(s))
        cand_offsets.append(len(cand_gold))
    return (n_pred, n_gold, pair_offsets, pair_pred, pair_gold,
            cand_offsets, cand_gold)


def recount(problem, mapping):
    n_pred, _, pair_offsets, pair_pred, pair_gold, _, _ = problem
    total = 0
    for k in range(len(pair_offsets) - 1):
        if all(mapping[pair_pred[e]] == pair_gold[e]
               for e in range(pair_offsets[k], pair_offsets[k + 1])):
            total += 1
    return total


def assert_valid_mapping(problem, mapping):
    n_pred, n_gold = problem[0], problem[1]
    assert len(mapping) == n_pred
    assigned = [g for g in mapping if g >= 0]
    assert len(assigned) == len(set(assigned)), "mapping not injective"
    assert all(g < n_gold for g in assigned)


def test_exact_matches_oracle_on_contract_problems():
    rng = random.Random(10)
    for _ in range(200):
        problem = random_problem(rng)
        want = oracle_solve_problem(*problem)
        got, mapping = _matchcore_py.solve(*problem, 0, 0, True)
        assert got == want
        assert_valid_mapping(problem, mapping)
        assert recount(problem, mapping) == got


def test_exact_tolerates_arbitrary_encodings():
    rng = random.Random(11)
    for _ in range(200):
        problem = random_problem(rng, contract=False)
        want = oracle_solve_problem(*problem)
        got, _ = _matchcore_py.solve(*problem, 0, 0, True)
        assert got == want


def test_hill_never_exceeds_oracle():
    rng = random.Random(12)
    hits = 0
    for i in range(200):
        problem = random_problem(rng)
        want = oracle_solve_problem(*problem)
        got, mapping = _matchcore_py.solve(*problem, i, 4, False)
        assert got <= want
        assert_valid_mapping(problem, mapping)
        assert recount(problem, mapping) == got
        hits += got == want
    assert hits >= 190    # tiny problems: the climber nearly always lands


def test_more_restarts_never_hurt():
    rng = random.Random(13)
    for i in range(100):
        problem = random_problem(rng, max_pred=8, max_gold=8, max_pairs=16)
        few, _ = _matchcore_py.solve(*problem, i, 2, False)
        many, _ = _matchcore_py.solve(*problem, i, 32, False)
        assert many >= few


def test_hill_is_deterministic_in_seed():
    rng = random.Random(14)
    for i in range(50):
        problem = random_problem(rng, max_pred=8, max_gold=8, max_pairs=16)
        a = _matchcore_py.solve(*problem, i, 4, False)
        b = _matchcore_py.solve(*problem, i, 4, False)
        assert a == b


def test_empty_problems():
    assert _matchcore_py.solve(0, 0, [0], [], [], [0], [], 0, 4, True) == (0, [])
    got, mapping = _matchcore_py.solve(3, 2, [0], [], [], [0, 0, 0, 0], [], 0, 4, False)
    assert got == 0
    assert mapping == [-1, -1, -1]


@needs_compiled
def test_kernel_dispatch_prefers_compiled():
    if os.environ.get("DRSKIT_NO_EXT"):
        assert not COMPILED
        assert KERNEL_NAME == "pure-python"
    else:
        assert COMPILED
        assert KERNEL_NAME == "compiled"


@needs_compiled
def test_compiled_and_pure_agree_bit_for_bit():
    """Same matched count AND same mapping, exact and hill, every seed."""
    rng = random.Random(15)
    for i in range(300):
        problem = random_problem(rng, max_pred=7, max_gold=7, max_pairs=14)
        for use_exact in (True, False):
            pure = _matchcore_py.solve(*problem, i, 4, use_exact)
            comp = _matchcore.solve(*problem, i, 4, use_exact)
            assert comp[0] == pure[0]
            assert list(comp[1]) == list(pure[1])


@needs_compiled
def test_compiled_exact_matches_oracle_on_garbage():
    rng = random.Random(16)
    for _ in range(200):
        problem = random_problem(rng, contract=False)
        want = oracle_solve_problem(*problem)
        got, _ = _matchcore.solve(*problem, 0, 0, True)
        assert got == want
