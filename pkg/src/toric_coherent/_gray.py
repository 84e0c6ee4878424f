"""Compiled Gray-code walk over the boundary group.

The walk visits ``start + b`` for every ``b`` in the span of the given face
masks, flipping generator ``ctz(k)`` at step ``k``.  Weights are updated
incrementally from the four bits each face touches.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numba import njit

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)

MAX_EDGES = 64


@njit(cache=True, inline="always")
def _popcount(v):
    v = v - ((v >> _S1) & _M1)
    v = (v & _M2) + ((v >> _S2) & _M2)
    v = (v + (v >> _S4)) & _M4
    return np.int64((v * _H01) >> _S56)


@njit(cache=True)
def _walk(starts, faces, n_edges, audit_mask):
    m = starts.shape[0]
    nf = faces.shape[0]
    hist = np.zeros((m, n_edges + 1), dtype=np.int64)
    chains = starts.copy()
    weights = np.empty(m, dtype=np.int64)
    for i in range(m):
        weights[i] = _popcount(chains[i])
        hist[i, weights[i]] += 1
    mismatches = 0
    total = np.int64(1) << nf
    for k in range(1, total):
        j = 0
        t = k
        while (t & 1) == 0:
            t >>= 1
            j += 1
        f = faces[j]
        for i in range(m):
            c = chains[i]
            weights[i] += 4 - 2 * _popcount(c & f)
            c = c ^ f
            chains[i] = c
            hist[i, weights[i]] += 1
        if audit_mask >= 0 and (k & audit_mask) == 0:
            for i in range(m):
                if _popcount(chains[i]) != weights[i]:
                    mismatches += 1
    return hist, mismatches


def gray_histograms(
    starts: Sequence[int],
    faces: Sequence[int],
    n_edges: int,
    audit_every: int = 1024,
):
    """Weight histograms of ``start + span(faces)`` for each start.

    ``audit_every`` must be a power of two; 0 disables the from-scratch
    weight audit.  Returns ``(hist, mismatches)`` with ``hist`` of shape
    ``(len(starts), n_edges + 1)``.
    """
    if n_edges > MAX_EDGES:
        raise ValueError(f"compiled walk supports at most {MAX_EDGES} edges, got {n_edges}")
    if audit_every and audit_every & (audit_every - 1):
        raise ValueError("audit_every must be a power of two")
    start_arr = np.array(list(starts), dtype=np.uint64)
    face_arr = np.array(list(faces), dtype=np.uint64)
    hist, mismatches = _walk(start_arr, face_arr, n_edges, audit_every - 1 if audit_every else -1)
    return hist, int(mismatches)
