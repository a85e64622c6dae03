"""Pure-Python update kernel.

Operates on interned word ids: ``words`` is the lexicographically sorted
table of every word present at t=0 (no rule ever creates a word), so the
smallest id is the lexicographic minimum. Memories are lists of ids.
"""

from __future__ import annotations

import numpy as np

ADDED = 0
COLLAPSED = 1

STOP_NONE = 0
STOP_CONSENSUS = 1
STOP_FIXED_POINT = 2


def make_hamming(words: np.ndarray):
    """Hamming distance between word ids via byte-packed big integers.

    One symbol per byte; XOR then fold each byte onto its low bit and count.
    """
    length = words.shape[1]
    packed = [int.from_bytes(row.tobytes(), "little") for row in np.ascontiguousarray(words, dtype=np.uint8)]
    low = int.from_bytes(b"\x01" * length, "little")

    def ham(a: int, b: int) -> int:
        v = packed[a] ^ packed[b]
        v |= v >> 4
        v |= v >> 2
        v |= v >> 1
        return (v & low).bit_count()

    return ham


def apply_rule(ham, length, indptr, indices, conveyed, memories, radius, weighted, u, draw):
    """Apply the local rule at ``u`` in place.

    Returns ``(ADDED, new_ids)`` or ``(COLLAPSED, word_id)``. ``draw(k)`` is
    called once, with ``k > 1``, only when the collapse has a real choice.
    """
    heard = [conveyed[v] for v in indices[indptr[u]:indptr[u + 1]]]
    distinct = list(dict.fromkeys(heard))
    mem = memories[u]
    if radius >= length:
        new = []
    elif radius == 0:
        known = set(mem)
        new = [c for c in distinct if c not in known]
    else:
        new = [c for c in distinct if all(c != y and ham(c, y) > radius for y in mem)]
    if new:
        mem.extend(new)
        mem.sort()
        return ADDED, new
    m = min(distinct)
    pool = heard if weighted else distinct
    if radius >= length:
        cands = sorted(pool)
    else:
        cands = sorted(c for c in pool if c == m or ham(c, m) <= radius)
    w = cands[draw(len(cands))] if len(cands) > 1 else cands[0]
    memories[u] = [w]
    return COLLAPSED, w


def conveyed_delta(ham, indptr, indices, conveyed, u, old, new) -> int:
    """Change of the energy numerator when ``u`` switches from ``old`` to ``new``."""
    if old == new:
        return 0
    d = 0
    for v in indices[indptr[u]:indptr[u + 1]]:
        x = conveyed[v]
        d += ham(new, x) - ham(old, x)
    return 2 * d


def advance(words, indptr, indices, conveyed, memories, radius, perm, t0, stream,
            steps, stride, stop_mode, weighted, numerator):
    """Run up to ``steps`` updates, mutating ``conveyed`` and ``memories``.

    ``perm`` is the sequential order or ``None`` for asynchronous draws.
    Returns ``(steps_done, numerator, sample_steps, sample_numerators)`` with
    a sample after every step whose absolute index is a multiple of
    ``stride`` (``stride == 0`` disables sampling).
    """
    ham = make_hamming(words)
    length = words.shape[1]
    n = len(conveyed)
    ip = indptr.tolist()
    ix = indices.tolist()
    conv = [int(c) for c in conveyed]
    order = None if perm is None else [int(p) for p in perm]
    multi = sum(1 for m in memories if len(m) > 1)
    below = stream.below
    sample_t, sample_num = [], []
    done = 0
    while done < steps:
        if stop_mode and numerator == 0 and (stop_mode == STOP_CONSENSUS or multi == 0):
            break
        t = t0 + done
        u = order[t % n] if order is not None else below(n)
        was_multi = len(memories[u]) > 1
        kind, what = apply_rule(ham, length, ip, ix, conv, memories, radius, weighted, u, below)
        if kind == ADDED:
            if not was_multi:
                multi += 1
        else:
            if was_multi:
                multi -= 1
            old = conv[u]
            if what != old:
                numerator += conveyed_delta(ham, ip, ix, conv, u, old, what)
                conv[u] = what
        done += 1
        if stride and (t + 1) % stride == 0:
            sample_t.append(t + 1)
            sample_num.append(numerator)
    conveyed[:] = conv
    return done, numerator, sample_t, sample_num
