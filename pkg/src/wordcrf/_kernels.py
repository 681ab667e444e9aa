"""Compiled loops over auxiliary label sets.

These run once per aux node per TRW-S iteration over every dictionary
n-gram, which is where plain numpy spends its time in per-group overhead.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def letter_mins(u, codes_h, head_ids, tail_ids, head_pat, tail_pat, F, out):
    """``out[q, c] = min over rows m with codes[m, q] == c of u[m] + sum_q' F[q', codes[m, q']]``.

    Entries with no matching row are set to ``inf``. ``F`` is ``n x K``.
    """
    h = codes_h
    n_head = head_pat.shape[0]
    n_tail = tail_pat.shape[0]
    ta = np.zeros(n_head)
    for a in range(n_head):
        s = 0.0
        for q in range(h):
            s += F[q, head_pat[a, q]]
        ta[a] = s
    tb = np.zeros(n_tail)
    for b in range(n_tail):
        s = 0.0
        for j in range(tail_pat.shape[1]):
            s += F[h + j, tail_pat[b, j]]
        tb[b] = s
    ga = np.full(n_head, np.inf)
    gb = np.full(n_tail, np.inf)
    for m in range(head_ids.shape[0]):
        a = head_ids[m]
        b = tail_ids[m]
        v = u[m] + ta[a] + tb[b]
        # branch-free minima: the comparisons are unpredictable
        ga[a] = min(ga[a], v)
        gb[b] = min(gb[b], v)
    out[:, :] = np.inf
    for a in range(n_head):
        for q in range(h):
            c = head_pat[a, q]
            out[q, c] = min(out[q, c], ga[a])
    for b in range(n_tail):
        for j in range(tail_pat.shape[1]):
            c = tail_pat[b, j]
            out[h + j, c] = min(out[h + j, c], gb[b])


@njit(cache=True)
def agreement_argmin(u, codes, chars, eps, penalty):
    """Lowest-index minimiser of ``u[m]`` plus ``penalty`` per disagreeing member.

    ``u`` has one more entry than ``codes`` has rows: the invalid label,
    which agrees with everything.
    """
    M = codes.shape[0]
    best = u[M]
    arg = M
    for m in range(M):
        v = u[m]
        for q in range(codes.shape[1]):
            x = chars[q]
            if x != eps and codes[m, q] != x:
                v += penalty
        if v < best or (v == best and m < arg):
            best = v
            arg = m
    return arg, best


@njit(cache=True)
def _incoming(s, unary, to_b, to_a, A, before_ptr, before_idx, after_ptr, after_idx, blk_ptr, blk_idx, n, out):
    out[:] = unary[s]
    for k in range(before_ptr[s], before_ptr[s + 1]):
        out += to_b[before_idx[k]]
    for k in range(after_ptr[s], after_ptr[s + 1]):
        out += to_a[after_idx[k]]
    for k in range(blk_ptr[s], blk_ptr[s + 1]):
        slot = blk_idx[k]
        out += A[slot // n, slot % n]


@njit(cache=True)
def _normalise(m):
    m -= m.min()


@njit(cache=True)
def trws_structured(
    unary, ea, eb, tables,
    before_ptr, before_idx, after_ptr, after_idx, blk_ptr, blk_idx, last_ptr, last_idx,
    w_char, w_blk, members,
    U, h, head_ids, tail_ids, head_pat, tail_pat, codes, eps, pen,
    chain_ptr, chain_start, chain_code,
    max_iters, tol, best_chars, best_aux, trace,
):
    """Sequential TRW-S on a character chain with dense edges and aux blocks.

    Messages into an aux block are stored compressed over character labels
    (``F``); see ``letter_mins``. Returns ``(iterations, converged)`` and
    fills ``best_chars``, ``best_aux`` and ``trace``.
    """
    N, K = unary.shape
    E = ea.shape[0]
    B = members.shape[0]
    n = members.shape[1]
    M = codes.shape[0]
    u_inv = U[M]
    to_b = np.zeros((E, K))
    to_a = np.zeros((E, K))
    F = np.zeros((B, n, K))
    A = np.zeros((B, n, K))
    G = np.full((B, n, K), np.inf)
    theta_bar = np.zeros((N, K))
    hs = np.empty(K)
    tmp = np.empty(K)
    m = np.empty(K)
    f = np.empty(K)
    x = np.zeros(N, dtype=np.int64)
    memo_chars = np.full((B, n), -1, dtype=np.int64)
    memo_arg = np.zeros(B, dtype=np.int64)
    memo_val = np.zeros(B)
    best_e = np.inf
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        # forward pass: characters send to later characters and into blocks
        for s in range(N):
            _incoming(s, unary, to_b, to_a, A, before_ptr, before_idx, after_ptr, after_idx, blk_ptr, blk_idx, n, hs)
            hs *= w_char[s]
            for k in range(after_ptr[s], after_ptr[s + 1]):
                e = after_idx[k]
                tmp[:] = hs - to_a[e]
                for j in range(K):
                    best = np.inf
                    for i in range(K):
                        best = min(best, tmp[i] + tables[e, i, j])
                    m[j] = best
                _normalise(m)
                to_b[e] = m
            for k in range(blk_ptr[s], blk_ptr[s + 1]):
                slot = blk_idx[k]
                bi = slot // n
                q = slot % n
                tmp[:] = hs - A[bi, q]
                lo = tmp.min()
                base = min(tmp[eps], lo + pen)
                for c in range(K):
                    F[bi, q, c] = min(tmp[c], base) - lo
        # backward pass: blocks answer their members, characters send to earlier ones
        for s in range(N - 1, -1, -1):
            for k in range(last_ptr[s], last_ptr[s + 1]):
                bi = last_idx[k]
                letter_mins(U, h, head_ids, tail_ids, head_pat, tail_pat, F[bi], G[bi])
                for q in range(n):
                    g_inv = w_blk * u_inv
                    lo = g_inv
                    for c in range(K):
                        tmp[c] = w_blk * G[bi, q, c] - F[bi, q, c]
                        lo = min(lo, tmp[c])
                    base = min(lo + pen, g_inv)
                    for c in range(K):
                        A[bi, q, c] = min(tmp[c], base) - lo
                    A[bi, q, eps] = 0.0
            _incoming(s, unary, to_b, to_a, A, before_ptr, before_idx, after_ptr, after_idx, blk_ptr, blk_idx, n, hs)
            hs *= w_char[s]
            theta_bar[s] = hs
            for k in range(before_ptr[s], before_ptr[s + 1]):
                e = before_idx[k]
                tmp[:] = hs - to_b[e]
                for i in range(K):
                    best = np.inf
                    for j in range(K):
                        best = min(best, tables[e, i, j] + tmp[j])
                    m[i] = best
                _normalise(m)
                to_a[e] = m
        # exact bound on the chain decomposition
        lb = 0.0
        for c in range(chain_ptr.shape[0] - 1):
            f[:] = theta_bar[chain_start[c]]
            closed = False
            for k in range(chain_ptr[c], chain_ptr[c + 1]):
                code = chain_code[k]
                if code >= 0:
                    tmp[:] = f - to_a[code]
                    for j in range(K):
                        best = np.inf
                        for i in range(K):
                            best = min(best, tmp[i] + tables[code, i, j])
                        f[j] = best - to_b[code, j] + theta_bar[eb[code], j]
                else:
                    slot = -code - 1
                    bi = slot // n
                    q = slot % n
                    tmp[:] = f - A[bi, q]
                    lo = tmp.min()
                    base = min(tmp[eps], lo + pen)
                    val = lo + w_blk * u_inv
                    for cc in range(K):
                        if cc != eps:
                            val = min(val, min(tmp[cc], base) - F[bi, q, cc] + w_blk * G[bi, q, cc])
                    lb += val
                    closed = True
                    break
            if not closed:
                lb += f.min()
        trace[it - 1] = lb
        # labeling from the reparameterised potentials
        energy = 0.0
        for s in range(N):
            tmp[:] = unary[s]
            m[:] = 0.0
            for k in range(before_ptr[s], before_ptr[s + 1]):
                e = before_idx[k]
                m += tables[e, x[ea[e]]]
            tmp += m
            for k in range(after_ptr[s], after_ptr[s + 1]):
                tmp += to_a[after_idx[k]]
            for k in range(blk_ptr[s], blk_ptr[s + 1]):
                slot = blk_idx[k]
                tmp += A[slot // n, slot % n]
            x[s] = np.argmin(tmp)
            energy += unary[s, x[s]] + m[x[s]]
        for bi in range(B):
            same = True
            for q in range(n):
                if memo_chars[bi, q] != x[members[bi, q]]:
                    same = False
            if not same:
                for q in range(n):
                    memo_chars[bi, q] = x[members[bi, q]]
                memo_arg[bi], memo_val[bi] = agreement_argmin(U, codes, memo_chars[bi], eps, pen)
            energy += memo_val[bi]
        if energy < best_e:
            best_e = energy
            best_chars[:] = x
            best_aux[:] = memo_arg
        if best_e - lb <= 1e-9 * max(1.0, abs(best_e)):
            converged = True
            break
        if it > 1 and lb - trace[it - 2] <= tol * max(1.0, abs(lb)):
            converged = True
            break
    return it, converged
