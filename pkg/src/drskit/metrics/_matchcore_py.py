"""Pure-Python mapping-search kernel.

Finds an injective partial mapping from "pred" variables/nodes to "gold"
variables/nodes maximizing the number of satisfied candidate pairs. A pair
is one (pred item, gold item) couple whose static parts already agree; it
is satisfied when every one of its variable constraints (p -> g) holds in
the mapping. Under an injective mapping, satisfied pairs correspond one to
one with exactly-matching items, so the satisfied count is the matched
count.

Two strategies, selected by the caller:

* exact: depth-first enumeration over candidate assignments (plus
  "unmapped") with an optimistic-bound prune; returns the true optimum;
* hill-climbing: greedy label-compatibility initialization plus seeded
  random restarts, steepest-ascent over single moves and pair swaps.

The compiled twin (``_matchcore.pyx``) implements the same algorithm with
identical tie-breaking and an identical splitmix64 RNG, so both return
bit-identical results for the same inputs.

Problem encoding (flat int lists, shared with the compiled kernel):

* ``pair_offsets`` (len P+1), ``pair_pred``/``pair_gold``: constraints of
  pair k are positions pair_offsets[k]..pair_offsets[k+1];
* ``cand_offsets`` (len n_pred+1), ``cand_gold``: sorted candidate gold
  ids per pred id.

Contract: within one pair, each pred variable appears in at most one
constraint and each gold id in at most one (problem builders emit pairs
as deduplicated partial injective maps), and every constraint's gold id
is a candidate of its pred variable. Hill-mode move deltas count a pair
once per touching constraint, so scores are only meaningful under the
contract; the exact path is robust to arbitrary input.
"""
from __future__ import annotations

from ..rand import SplitMix64

HAVE_C_KERNEL = False


def _build_pairs_by_var(n_pred, pair_offsets, pair_pred):
    by_var = [[] for _ in range(n_pred)]
    n_pairs = len(pair_offsets) - 1
    for k in range(n_pairs):
        for pos in range(pair_offsets[k], pair_offsets[k + 1]):
            by_var[pair_pred[pos]].append(k)
    return by_var


def _pair_satisfied(k, mapping, pair_offsets, pair_pred, pair_gold):
    for pos in range(pair_offsets[k], pair_offsets[k + 1]):
        if mapping[pair_pred[pos]] != pair_gold[pos]:
            return False
    return True


def _count_subset(pair_ids, mapping, pair_offsets, pair_pred, pair_gold):
    total = 0
    for k in pair_ids:
        if _pair_satisfied(k, mapping, pair_offsets, pair_pred, pair_gold):
            total += 1
    return total


def _full_score(mapping, pair_offsets, pair_pred, pair_gold):
    n_pairs = len(pair_offsets) - 1
    total = 0
    for k in range(n_pairs):
        if _pair_satisfied(k, mapping, pair_offsets, pair_pred, pair_gold):
            total += 1
    return total


def _greedy_init(n_pred, n_gold, pair_offsets, pair_pred, pair_gold,
                 cand_offsets, cand_gold):
    """Assign each pred var the unused candidate with the highest
    label-compatibility count (number of pairs proposing that couple);
    ties break toward the lowest gold id."""
    affinity = {}
    n_pairs = len(pair_offsets) - 1
    for k in range(n_pairs):
        for pos in range(pair_offsets[k], pair_offsets[k + 1]):
            key = (pair_pred[pos], pair_gold[pos])
            affinity[key] = affinity.get(key, 0) + 1
    mapping = [-1] * n_pred
    used = [False] * n_gold
    for p in range(n_pred):
        best_g = -1
        best_aff = 0
        for pos in range(cand_offsets[p], cand_offsets[p + 1]):
            g = cand_gold[pos]
            if used[g]:
                continue
            aff = affinity.get((p, g), 0)
            if aff > best_aff:
                best_aff = aff
                best_g = g
        if best_g >= 0:
            mapping[p] = best_g
            used[best_g] = True
    return mapping, used


def _random_init(n_pred, n_gold, cand_offsets, cand_gold, rng):
    mapping = [-1] * n_pred
    used = [False] * n_gold
    pool = []
    for p in range(n_pred):
        pool.clear()
        for pos in range(cand_offsets[p], cand_offsets[p + 1]):
            g = cand_gold[pos]
            if not used[g]:
                pool.append(g)
        if pool:
            g = pool[rng.randbelow(len(pool))]
            mapping[p] = g
            used[g] = True
    return mapping, used


def _climb(mapping, used, score, n_pred, pair_offsets, pair_pred, pair_gold,
           cand_offsets, cand_gold, pairs_by_var, stamp, stamp_token):
    """Steepest-ascent local search; strictly-improving moves/swaps only,
    first-encountered (lowest index) among equal best gains."""
    scratch = []
    while True:
        best_gain = 0
        best_kind = -1  # 0 move, 1 swap
        best_a = -1
        best_b = -1
        for p in range(n_pred):
            cur = mapping[p]
            affected = pairs_by_var[p]
            before = _count_subset(affected, mapping, pair_offsets, pair_pred, pair_gold)
            for pos in range(cand_offsets[p], cand_offsets[p + 1]):
                g = cand_gold[pos]
                if g == cur or used[g]:
                    continue
                mapping[p] = g
                after = _count_subset(affected, mapping, pair_offsets, pair_pred, pair_gold)
                mapping[p] = cur
                gain = after - before
                if gain > best_gain:
                    best_gain = gain
                    best_kind = 0
                    best_a = p
                    best_b = g
        for p1 in range(n_pred):
            m1 = mapping[p1]
            for p2 in range(p1 + 1, n_pred):
                m2 = mapping[p2]
                if m1 == -1 and m2 == -1:
                    continue
                stamp_token += 1
                scratch.clear()
                for k in pairs_by_var[p1]:
                    if stamp[k] != stamp_token:
                        stamp[k] = stamp_token
                        scratch.append(k)
                for k in pairs_by_var[p2]:
                    if stamp[k] != stamp_token:
                        stamp[k] = stamp_token
                        scratch.append(k)
                before = _count_subset(scratch, mapping, pair_offsets, pair_pred, pair_gold)
                mapping[p1] = m2
                mapping[p2] = m1
                after = _count_subset(scratch, mapping, pair_offsets, pair_pred, pair_gold)
                mapping[p1] = m1
                mapping[p2] = m2
                gain = after - before
                if gain > best_gain:
                    best_gain = gain
                    best_kind = 1
                    best_a = p1
                    best_b = p2
        if best_gain <= 0:
            return score, stamp_token
        if best_kind == 0:
            if mapping[best_a] >= 0:
                used[mapping[best_a]] = False
            mapping[best_a] = best_b
            used[best_b] = True
        else:
            mapping[best_a], mapping[best_b] = mapping[best_b], mapping[best_a]
        score += best_gain


def _hill_climb(n_pred, n_gold, pair_offsets, pair_pred, pair_gold,
                cand_offsets, cand_gold, seed, restarts):
    pairs_by_var = _build_pairs_by_var(n_pred, pair_offsets, pair_pred)
    n_pairs = len(pair_offsets) - 1
    stamp = [0] * n_pairs
    stamp_token = 0
    rng = SplitMix64(seed)
    best_score = -1
    best_mapping = [-1] * n_pred
    for attempt in range(restarts + 1):
        if attempt == 0:
            mapping, used = _greedy_init(
                n_pred, n_gold, pair_offsets, pair_pred, pair_gold,
                cand_offsets, cand_gold)
        else:
            mapping, used = _random_init(n_pred, n_gold, cand_offsets, cand_gold, rng)
        score = _full_score(mapping, pair_offsets, pair_pred, pair_gold)
        score, stamp_token = _climb(
            mapping, used, score, n_pred, pair_offsets, pair_pred, pair_gold,
            cand_offsets, cand_gold, pairs_by_var, stamp, stamp_token)
        if score > best_score:
            best_score = score
            best_mapping = mapping[:]
    return best_score, best_mapping


def _exact_search(n_pred, n_gold, pair_offsets, pair_pred, pair_gold,
                  cand_offsets, cand_gold):
    """Exhaustive DFS over candidate assignments; first optimum found under
    the fixed enumeration order (candidates ascending, then unmapped) wins."""
    n_pairs = len(pair_offsets) - 1
    # constraints touching each pred var, as (pair id, required gold id)
    entries_by_var = [[] for _ in range(n_pred)]
    for k in range(n_pairs):
        for pos in range(pair_offsets[k], pair_offsets[k + 1]):
            entries_by_var[pair_pred[pos]].append((k, pair_gold[pos]))
    # per-pair bookkeeping: satisfied-constraint count and violation count
    need = [pair_offsets[k + 1] - pair_offsets[k] for k in range(n_pairs)]
    have = [0] * n_pairs
    bad = [0] * n_pairs

    mapping = [-1] * n_pred
    used = [False] * n_gold
    best = {"score": -1, "mapping": mapping[:]}
    # a pair with no constraints is satisfied by any mapping
    base = sum(1 for k in range(n_pairs) if need[k] == 0)
    state = {"score": base, "potential": n_pairs}

    def assign(p, g):
        delta = 0
        for k, req in entries_by_var[p]:
            if req == g:
                have[k] += 1
                if have[k] == need[k] and bad[k] == 0:
                    delta += 1
            else:
                # have[k] < need[k] here: this position is not yet counted,
                # so the pair cannot currently be satisfied
                bad[k] += 1
                if bad[k] == 1:
                    state["potential"] -= 1
        state["score"] += delta

    def unassign(p, g):
        delta = 0
        for k, req in entries_by_var[p]:
            if req == g:
                if have[k] == need[k] and bad[k] == 0:
                    delta += 1
                have[k] -= 1
            else:
                bad[k] -= 1
                if bad[k] == 0:
                    state["potential"] += 1
        state["score"] -= delta

    def dfs(p):
        if state["potential"] <= best["score"]:
            return
        if p == n_pred:
            if state["score"] > best["score"]:
                best["score"] = state["score"]
                best["mapping"] = mapping[:]
            return
        for pos in range(cand_offsets[p], cand_offsets[p + 1]):
            g = cand_gold[pos]
            if used[g]:
                continue
            used[g] = True
            mapping[p] = g
            assign(p, g)
            dfs(p + 1)
            unassign(p, g)
            mapping[p] = -1
            used[g] = False
        # leave p unmapped: every pair touching p is violated
        for k, _req in entries_by_var[p]:
            bad[k] += 1
            if bad[k] == 1:
                state["potential"] -= 1
        dfs(p + 1)
        for k, _req in entries_by_var[p]:
            bad[k] -= 1
            if bad[k] == 0:
                state["potential"] += 1
    dfs(0)
    score = max(best["score"], 0)
    return score, best["mapping"]


def solve(n_pred, n_gold, pair_offsets, pair_pred, pair_gold,
          cand_offsets, cand_gold, seed, restarts, use_exact):
    """Entry point shared with the compiled kernel.

    Returns (matched, mapping) where mapping[p] is a gold id or -1.
    """
    if n_pred == 0 or len(pair_offsets) - 1 == 0:
        return 0, [-1] * n_pred
    if use_exact:
        return _exact_search(n_pred, n_gold, pair_offsets, pair_pred,
                             pair_gold, cand_offsets, cand_gold)
    return _hill_climb(n_pred, n_gold, pair_offsets, pair_pred, pair_gold,
                       cand_offsets, cand_gold, seed, restarts)
