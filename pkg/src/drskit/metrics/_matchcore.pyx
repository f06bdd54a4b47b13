# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mapping-search kernel.

Same algorithm, same tie-breaking and the same splitmix64 RNG as the
pure-Python twin in ``_matchcore_py``; the two return bit-identical
results for identical inputs. See that module for the semantics and the
problem encoding.
"""
import array as _array

from cpython cimport array

HAVE_C_KERNEL = True

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15UL


cdef inline unsigned long long _mix64(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9UL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBUL
    return z ^ (z >> 31)


cdef inline unsigned long long _next_u64(unsigned long long* state) noexcept nogil:
    state[0] = state[0] + GOLDEN
    return _mix64(state[0])


cdef inline bint _pair_satisfied(int k, int[::1] mapping, int[::1] pair_off,
                                 int[::1] pair_pred, int[::1] pair_gold) noexcept nogil:
    cdef int pos
    for pos in range(pair_off[k], pair_off[k + 1]):
        if mapping[pair_pred[pos]] != pair_gold[pos]:
            return 0
    return 1


cdef int _count_slice(int[::1] ids, int lo, int hi, int[::1] mapping,
                      int[::1] pair_off, int[::1] pair_pred,
                      int[::1] pair_gold) noexcept nogil:
    cdef int total = 0
    cdef int i
    for i in range(lo, hi):
        if _pair_satisfied(ids[i], mapping, pair_off, pair_pred, pair_gold):
            total += 1
    return total


cdef int _count_scratch(int[::1] ids, int n, int[::1] mapping, int[::1] pair_off,
                        int[::1] pair_pred, int[::1] pair_gold) noexcept nogil:
    cdef int total = 0
    cdef int i
    for i in range(n):
        if _pair_satisfied(ids[i], mapping, pair_off, pair_pred, pair_gold):
            total += 1
    return total


cdef int _full_score(int n_pairs, int[::1] mapping, int[::1] pair_off,
                     int[::1] pair_pred, int[::1] pair_gold) noexcept nogil:
    cdef int total = 0
    cdef int k
    for k in range(n_pairs):
        if _pair_satisfied(k, mapping, pair_off, pair_pred, pair_gold):
            total += 1
    return total


cdef void _greedy_init(int n_pred, int n_gold, int n_pairs,
                       int[::1] pair_off, int[::1] pair_pred, int[::1] pair_gold,
                       int[::1] cand_off, int[::1] cand_gold,
                       int[::1] affinity, int[::1] mapping,
                       unsigned char[::1] used) noexcept nogil:
    cdef int k, pos, p, g, best_g, best_aff, aff
    for pos in range(n_pred * n_gold):
        affinity[pos] = 0
    for k in range(n_pairs):
        for pos in range(pair_off[k], pair_off[k + 1]):
            affinity[pair_pred[pos] * n_gold + pair_gold[pos]] += 1
    for g in range(n_gold):
        used[g] = 0
    for p in range(n_pred):
        best_g = -1
        best_aff = 0
        for pos in range(cand_off[p], cand_off[p + 1]):
            g = cand_gold[pos]
            if used[g]:
                continue
            aff = affinity[p * n_gold + g]
            if aff > best_aff:
                best_aff = aff
                best_g = g
        if best_g >= 0:
            mapping[p] = best_g
            used[best_g] = 1
        else:
            mapping[p] = -1


cdef void _random_init(int n_pred, int n_gold, int[::1] cand_off,
                       int[::1] cand_gold, unsigned long long* rng,
                       int[::1] mapping, unsigned char[::1] used,
                       int[::1] pool) noexcept nogil:
    cdef int p, pos, g, n_pool
    for g in range(n_gold):
        used[g] = 0
    for p in range(n_pred):
        n_pool = 0
        for pos in range(cand_off[p], cand_off[p + 1]):
            g = cand_gold[pos]
            if not used[g]:
                pool[n_pool] = g
                n_pool += 1
        if n_pool:
            g = pool[_next_u64(rng) % (<unsigned long long> n_pool)]
            mapping[p] = g
            used[g] = 1
        else:
            mapping[p] = -1


cdef int _climb(int n_pred, int[::1] mapping, unsigned char[::1] used, int score,
                int[::1] pair_off, int[::1] pair_pred, int[::1] pair_gold,
                int[::1] cand_off, int[::1] cand_gold,
                int[::1] bv_off, int[::1] bv_pair,
                int[::1] stamp, int* stamp_token,
                int[::1] scratch) noexcept nogil:
    cdef int best_gain, best_kind, best_a, best_b
    cdef int p, p1, p2, pos, g, cur, m1, m2, before, after, gain, k, i, n_scratch
    while True:
        best_gain = 0
        best_kind = -1
        best_a = -1
        best_b = -1
        for p in range(n_pred):
            cur = mapping[p]
            before = _count_slice(bv_pair, bv_off[p], bv_off[p + 1], mapping,
                                  pair_off, pair_pred, pair_gold)
            for pos in range(cand_off[p], cand_off[p + 1]):
                g = cand_gold[pos]
                if g == cur or used[g]:
                    continue
                mapping[p] = g
                after = _count_slice(bv_pair, bv_off[p], bv_off[p + 1], mapping,
                                     pair_off, pair_pred, pair_gold)
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
                stamp_token[0] += 1
                n_scratch = 0
                for i in range(bv_off[p1], bv_off[p1 + 1]):
                    k = bv_pair[i]
                    if stamp[k] != stamp_token[0]:
                        stamp[k] = stamp_token[0]
                        scratch[n_scratch] = k
                        n_scratch += 1
                for i in range(bv_off[p2], bv_off[p2 + 1]):
                    k = bv_pair[i]
                    if stamp[k] != stamp_token[0]:
                        stamp[k] = stamp_token[0]
                        scratch[n_scratch] = k
                        n_scratch += 1
                before = _count_scratch(scratch, n_scratch, mapping,
                                        pair_off, pair_pred, pair_gold)
                mapping[p1] = m2
                mapping[p2] = m1
                after = _count_scratch(scratch, n_scratch, mapping,
                                       pair_off, pair_pred, pair_gold)
                mapping[p1] = m1
                mapping[p2] = m2
                gain = after - before
                if gain > best_gain:
                    best_gain = gain
                    best_kind = 1
                    best_a = p1
                    best_b = p2
        if best_gain <= 0:
            return score
        if best_kind == 0:
            if mapping[best_a] >= 0:
                used[mapping[best_a]] = 0
            mapping[best_a] = best_b
            used[best_b] = 1
        else:
            m1 = mapping[best_a]
            mapping[best_a] = mapping[best_b]
            mapping[best_b] = m1
        score += best_gain


cdef void _dfs(int p, int n_pred, int[::1] pair_off, int[::1] pair_pred,
               int[::1] pair_gold, int[::1] cand_off, int[::1] cand_gold,
               int[::1] bv_off, int[::1] bv_pair, int[::1] bv_req,
               int[::1] need, int[::1] have, int[::1] bad,
               int[::1] mapping, unsigned char[::1] used,
               int* score, int* potential, int* best_score,
               int[::1] best_mapping) noexcept nogil:
    cdef int pos, g, i, k, delta
    if potential[0] <= best_score[0]:
        return
    if p == n_pred:
        if score[0] > best_score[0]:
            best_score[0] = score[0]
            for i in range(n_pred):
                best_mapping[i] = mapping[i]
        return
    for pos in range(cand_off[p], cand_off[p + 1]):
        g = cand_gold[pos]
        if used[g]:
            continue
        used[g] = 1
        mapping[p] = g
        delta = 0
        for i in range(bv_off[p], bv_off[p + 1]):
            k = bv_pair[i]
            if bv_req[i] == g:
                have[k] += 1
                if have[k] == need[k] and bad[k] == 0:
                    delta += 1
            else:
                bad[k] += 1
                if bad[k] == 1:
                    potential[0] -= 1
        score[0] += delta
        _dfs(p + 1, n_pred, pair_off, pair_pred, pair_gold, cand_off, cand_gold,
             bv_off, bv_pair, bv_req, need, have, bad, mapping, used,
             score, potential, best_score, best_mapping)
        delta = 0
        for i in range(bv_off[p], bv_off[p + 1]):
            k = bv_pair[i]
            if bv_req[i] == g:
                if have[k] == need[k] and bad[k] == 0:
                    delta += 1
                have[k] -= 1
            else:
                bad[k] -= 1
                if bad[k] == 0:
                    potential[0] += 1
        score[0] -= delta
        mapping[p] = -1
        used[g] = 0
    # unmapped branch
    for i in range(bv_off[p], bv_off[p + 1]):
        k = bv_pair[i]
        bad[k] += 1
        if bad[k] == 1:
            potential[0] -= 1
    _dfs(p + 1, n_pred, pair_off, pair_pred, pair_gold, cand_off, cand_gold,
         bv_off, bv_pair, bv_req, need, have, bad, mapping, used,
         score, potential, best_score, best_mapping)
    for i in range(bv_off[p], bv_off[p + 1]):
        k = bv_pair[i]
        bad[k] -= 1
        if bad[k] == 0:
            potential[0] += 1


def solve(int n_pred, int n_gold, pair_offsets, pair_pred, pair_gold,
          cand_offsets, cand_gold, seed, int restarts, bint use_exact):
    """Entry point; see the pure twin for the contract."""
    cdef int n_pairs = len(pair_offsets) - 1
    if n_pred == 0 or n_pairs == 0:
        return 0, [-1] * n_pred

    cdef array.array po_a = _array.array('i', pair_offsets)
    cdef array.array pp_a = _array.array('i', pair_pred)
    cdef array.array pg_a = _array.array('i', pair_gold)
    cdef array.array co_a = _array.array('i', cand_offsets)
    cdef array.array cg_a = _array.array('i', cand_gold)
    cdef int[::1] pair_off = po_a
    cdef int[::1] ppred = pp_a
    cdef int[::1] pgold = pg_a
    cdef int[::1] cand_off = co_a
    cdef int[::1] cgold = cg_a

    # pairs-by-variable index (flat, with the required gold id per entry)
    cdef array.array bvo_a = array.clone(po_a, n_pred + 1, zero=True)
    cdef int[::1] bv_off = bvo_a
    cdef int n_con = len(pair_pred)
    cdef array.array bvp_a = array.clone(po_a, n_con, zero=False)
    cdef array.array bvr_a = array.clone(po_a, n_con, zero=False)
    cdef int[::1] bv_pair = bvp_a
    cdef int[::1] bv_req = bvr_a
    cdef int k, pos, p, total, c
    for pos in range(n_con):
        bv_off[ppred[pos] + 1] += 1
    for p in range(n_pred):
        bv_off[p + 1] += bv_off[p]
    cdef array.array cur_a = array.clone(po_a, n_pred, zero=True)
    cdef int[::1] cursor = cur_a
    for k in range(n_pairs):
        for pos in range(pair_off[k], pair_off[k + 1]):
            p = ppred[pos]
            c = bv_off[p] + cursor[p]
            bv_pair[c] = k
            bv_req[c] = pgold[pos]
            cursor[p] += 1

    cdef array.array map_a = array.clone(po_a, n_pred, zero=False)
    cdef int[::1] mapping = map_a
    cdef array.array used_a = _array.array('B', bytes(n_gold if n_gold else 1))
    cdef unsigned char[::1] used = used_a
    cdef int i

    cdef array.array best_a
    cdef int[::1] best_mapping
    cdef array.array need_a, have_a, bad_a
    cdef int[::1] need, have, bad
    cdef int score_c, potential_c, best_score_c
    cdef array.array aff_a, stamp_a, scratch_a, pool_a, bm_a
    cdef int[::1] affinity, stamp, scratch, pool, best_map_hc
    cdef unsigned long long rng_state
    cdef int stamp_token = 0
    cdef int attempt, score, best_score

    if use_exact:
        need_a = array.clone(po_a, n_pairs, zero=False)
        have_a = array.clone(po_a, n_pairs, zero=True)
        bad_a = array.clone(po_a, n_pairs, zero=True)
        need = need_a
        have = have_a
        bad = bad_a
        for k in range(n_pairs):
            need[k] = pair_off[k + 1] - pair_off[k]
        best_a = array.clone(po_a, n_pred, zero=False)
        best_mapping = best_a
        for i in range(n_pred):
            mapping[i] = -1
            best_mapping[i] = -1
        score_c = 0
        for k in range(n_pairs):
            if need[k] == 0:   # constraint-free pair: satisfied by any mapping
                score_c += 1
        potential_c = n_pairs
        best_score_c = -1
        _dfs(0, n_pred, pair_off, ppred, pgold, cand_off, cgold,
             bv_off, bv_pair, bv_req, need, have, bad, mapping, used,
             &score_c, &potential_c, &best_score_c, best_mapping)
        if best_score_c < 0:
            best_score_c = 0
        return best_score_c, list(best_a)

    # hill climbing
    aff_a = array.clone(po_a, n_pred * n_gold, zero=False)
    affinity = aff_a
    stamp_a = array.clone(po_a, n_pairs, zero=True)
    stamp = stamp_a
    scratch_a = array.clone(po_a, n_con if n_con else 1, zero=False)
    scratch = scratch_a
    pool_a = array.clone(po_a, n_gold if n_gold else 1, zero=False)
    pool = pool_a
    bm_a = array.clone(po_a, n_pred, zero=False)
    best_map_hc = bm_a
    for i in range(n_pred):
        best_map_hc[i] = -1
    rng_state = <unsigned long long> (seed & 0xFFFFFFFFFFFFFFFF)
    best_score = -1
    for attempt in range(restarts + 1):
        if attempt == 0:
            _greedy_init(n_pred, n_gold, n_pairs, pair_off, ppred, pgold,
                         cand_off, cgold, affinity, mapping, used)
        else:
            _random_init(n_pred, n_gold, cand_off, cgold, &rng_state,
                         mapping, used, pool)
        score = _full_score(n_pairs, mapping, pair_off, ppred, pgold)
        score = _climb(n_pred, mapping, used, score, pair_off, ppred, pgold,
                       cand_off, cgold, bv_off, bv_pair, stamp, &stamp_token,
                       scratch)
        if score > best_score:
            best_score = score
            for i in range(n_pred):
                best_map_hc[i] = mapping[i]
    return best_score, list(bm_a)
