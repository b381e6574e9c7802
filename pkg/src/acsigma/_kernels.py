"""Compiled depth-first search over words on sigma.

A word w_1..w_L (adjacent letters distinct) scores cvar / vf where

    cvar  = sum_j W[w_j, w_{j+1}]
    count_l = INIT[w_1, l] + sum_j INC[w_j, w_{j+1}, l]
    vf    = max_l count_l

for the precomputed candidate lines l.  Both quantities are additive along
the word, so each DFS step costs O(#lines).
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_NODE_LIMIT = 1


@njit(cache=True, nogil=True)
def _ratio_tables(W, INC, t, lmax, G):
    # G[l, a, r]: best sum of (W - t * INC_l) over walks from a using <= r edges
    n = W.shape[0]
    nl = INC.shape[2]
    for l in range(nl):
        for a in range(n):
            G[l, a, 0] = 0.0
    for r in range(1, lmax):
        for l in range(nl):
            for a in range(n):
                g = 0.0
                for b in range(n):
                    if b == a:
                        continue
                    v = W[a, b] - t * INC[a, b, l] + G[l, b, r - 1]
                    if v > g:
                        g = v
                G[l, a, r] = g


@njit(cache=True, nogil=True)
def _mixed_table(W, INCM, t, lmax, GM):
    # as _ratio_tables for one convex combination of lines
    n = W.shape[0]
    for a in range(n):
        GM[a, 0] = 0.0
    for r in range(1, lmax):
        for a in range(n):
            g = 0.0
            for b in range(n):
                if b == a:
                    continue
                v = W[a, b] - t * INCM[a, b] + GM[b, r - 1]
                if v > g:
                    g = v
            GM[a, r] = g


@njit(cache=True, nogil=True)
def _pruned(G, counts, depth, b, cv, t, r, tol):
    nl = G.shape[0]
    for l in range(nl):
        if cv - t * counts[depth, l] + G[l, b, r] <= -tol:
            return True
    return False


@njit(cache=True, nogil=True)
def word_search(W, INIT, INC, lmax, lo, hi, bnb, node_limit, floor, eta, INITM, INCM, mixed):
    """Search all words of length <= lmax whose first letter lies in [lo, hi).

    Returns (best_value, best_word, best_len, best_vf, best_line, best_cvar,
    value_by_length, nodes, status).  A word replaces the best one only if
    it is larger by more than ``eta``, so values within ``eta`` count as
    ties and the first in DFS preorder (lexicographic) is kept.

    Branch-and-bound prunes a subtree when, for some line l, every
    completion has cvar - t count_l < 0 with t = max(best, floor) + eta;
    then no completion can replace the best.  ``floor`` is an externally
    known lower bound.  With ``mixed`` set, the convex combination of lines
    given by INITM/INCM is tried as well (valid since vf >= any average of
    the counts).
    """
    n = W.shape[0]
    nl = INIT.shape[1]
    word = np.zeros(lmax, np.int64)
    nxt = np.zeros(lmax, np.int64)
    counts = np.zeros((lmax, nl), np.int64)
    cv = np.zeros(lmax)
    best = -1.0
    best_word = np.zeros(lmax, np.int64)
    best_len = 0
    best_vf = 0
    best_line = -1
    best_cvar = 0.0
    by_len = np.full(lmax + 1, -1.0)
    G = np.zeros((nl, n, lmax))
    wmax = 0.0
    for a in range(n):
        for b in range(n):
            if W[a, b] > wmax:
                wmax = W[a, b]
    GM = np.zeros((n, lmax))
    cm = np.zeros(lmax)
    threshold = floor
    if bnb:
        _ratio_tables(W, INC, threshold + eta, lmax, G)
        if mixed:
            _mixed_table(W, INCM, threshold + eta, lmax, GM)
    nodes = 0

    for first in range(lo, hi):
        word[0] = first
        cv[0] = 0.0
        cm[0] = INITM[first]
        vf = 0
        arg = -1
        for l in range(nl):
            c = INIT[first, l]
            counts[0, l] = c
            if c > vf:
                vf = c
                arg = l
        nodes += 1
        if by_len[1] < 0.0:
            by_len[1] = 0.0
        if 0.0 > best + eta:
            best = 0.0
            best_word[0] = first
            best_len = 1
            best_vf = vf
            best_line = arg
            best_cvar = 0.0
        if lmax < 2:
            continue
        depth = 0
        nxt[0] = 0
        while depth >= 0:
            if depth + 1 >= lmax or nxt[depth] >= n:
                depth -= 1
                continue
            b = nxt[depth]
            nxt[depth] += 1
            a = word[depth]
            if b == a:
                continue
            d1 = depth + 1
            word[d1] = b
            c1 = cv[depth] + W[a, b]
            cv[d1] = c1
            cm[d1] = cm[depth] + INCM[a, b]
            vf = 0
            arg = -1
            for l in range(nl):
                c = counts[depth, l] + INC[a, b, l]
                counts[d1, l] = c
                if c > vf:
                    vf = c
                    arg = l
            nodes += 1
            if nodes > node_limit:
                return (best, best_word, best_len, best_vf, best_line, best_cvar,
                        by_len, nodes, STATUS_NODE_LIMIT)
            val = c1 / vf
            length = d1 + 1
            if val > by_len[length]:
                by_len[length] = val
            if val > best + eta:
                best = val
                for k in range(length):
                    best_word[k] = word[k]
                best_len = length
                best_vf = vf
                best_line = arg
                best_cvar = c1
                if bnb and best > threshold:
                    threshold = best
                    _ratio_tables(W, INC, threshold + eta, lmax, G)
                    if mixed:
                        _mixed_table(W, INCM, threshold + eta, lmax, GM)
            if bnb:
                # rounding in G and the partial sums is O(lmax^2 eps) relative
                tp = threshold + eta
                tol = 1e-13 * (1.0 + wmax * lmax + tp * lmax)
                if _pruned(G, counts, d1, b, c1, tp, lmax - length, tol):
                    continue
                if mixed and c1 - tp * cm[d1] + GM[b, lmax - length] <= -tol:
                    continue
            depth = d1
            nxt[d1] = 0
    return (best, best_word, best_len, best_vf, best_line, best_cvar,
            by_len, nodes, STATUS_OK)


@njit(cache=True, nogil=True)
def word_value(W, INIT, INC, word):
    """(cvar, vf, line index) of one word, accumulated exactly as in the search."""
    nl = INIT.shape[1]
    counts = INIT[word[0]].copy()
    cv = 0.0
    for j in range(1, word.shape[0]):
        a = word[j - 1]
        b = word[j]
        cv = cv + W[a, b]
        for l in range(nl):
            counts[l] += INC[a, b, l]
    vf = 0
    arg = -1
    for l in range(nl):
        if counts[l] > vf:
            vf = counts[l]
            arg = l
    return cv, vf, arg
