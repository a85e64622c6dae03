# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled update kernel; same contract and random-draw order as ``_fallback.advance``."""

from libc.stdint cimport uint8_t, uint32_t, uint64_t, int32_t, int64_t
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

import numpy as np


cdef inline uint32_t _below(bitgen_t* rng, uint32_t k) noexcept nogil:
    # Lemire multiply-shift on the upper 32 bits; must match rng.Stream.below
    cdef uint32_t threshold = (<uint32_t>(0u - k)) % k
    cdef uint64_t m
    while True:
        m = (rng.next_uint64(rng.state) >> 32) * <uint64_t>k
        if <uint32_t>m >= threshold:
            return <uint32_t>(m >> 32)


cdef inline int _ham(const uint8_t* w, int a, int b, int length) noexcept nogil:
    cdef const uint8_t* x = w + <Py_ssize_t>a * length
    cdef const uint8_t* y = w + <Py_ssize_t>b * length
    cdef int k, d = 0
    for k in range(length):
        d += x[k] != y[k]
    return d


cdef inline bint _within(const uint8_t* w, int a, int b, int length, int radius) noexcept nogil:
    # H(a, b) <= radius, bailing out as soon as the radius is exceeded
    cdef const uint8_t* x = w + <Py_ssize_t>a * length
    cdef const uint8_t* y = w + <Py_ssize_t>b * length
    cdef int k, d = 0
    for k in range(length):
        if x[k] != y[k]:
            d += 1
            if d > radius:
                return False
    return True


def advance(words, indptr, indices, conveyed, list memories, int radius, perm,
            int64_t t0, stream, int64_t steps, int64_t stride, int stop_mode,
            bint weighted, numerator):
    cdef const uint8_t[:, ::1] wv = np.ascontiguousarray(words, dtype=np.uint8)
    cdef const int32_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef const int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    conv_arr = np.ascontiguousarray(conveyed, dtype=np.int32).copy()
    cdef int32_t[::1] conv = conv_arr
    cdef int n = conv.shape[0]
    cdef int length = wv.shape[1]
    cdef const uint8_t* w = &wv[0, 0]
    cdef bint sequential = perm is not None
    cdef const int32_t[::1] order
    if sequential:
        order = np.ascontiguousarray(perm, dtype=np.int32)
    else:
        order = np.zeros(1, dtype=np.int32)

    capsule = stream.bitgen.capsule
    cdef bitgen_t* rng = <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef vector[vector[int32_t]] mem
    mem.resize(n)
    cdef int u, v, i, j, k, c, y, m, wsel, old
    cdef int64_t multi = 0
    for u in range(n):
        for c in memories[u]:
            mem[u].push_back(c)
        if mem[u].size() > 1:
            multi += 1

    cdef int64_t num = numerator
    cdef int64_t done = 0, t, d
    cdef vector[int32_t] heard, distinct, fresh, cands
    cdef bint known, dup, full = radius >= length
    sample_t = []
    sample_num = []

    while done < steps:
        if stop_mode != 0 and num == 0 and (stop_mode == 1 or multi == 0):
            break
        t = t0 + done
        if sequential:
            u = order[t % n]
        else:
            u = _below(rng, n)

        heard.clear()
        distinct.clear()
        for i in range(ip[u], ip[u + 1]):
            c = conv[ix[i]]
            heard.push_back(c)
            dup = False
            for j in range(distinct.size()):
                if distinct[j] == c:
                    dup = True
                    break
            if not dup:
                distinct.push_back(c)

        fresh.clear()
        if not full:
            for i in range(distinct.size()):
                c = distinct[i]
                known = False
                for j in range(mem[u].size()):
                    y = mem[u][j]
                    if y == c or (radius > 0 and _within(w, c, y, length, radius)):
                        known = True
                        break
                if not known:
                    fresh.push_back(c)

        if fresh.size() > 0:
            if mem[u].size() == 1:
                multi += 1
            for i in range(fresh.size()):
                mem[u].push_back(fresh[i])
        else:
            m = distinct[0]
            for i in range(1, distinct.size()):
                if distinct[i] < m:
                    m = distinct[i]
            cands.clear()
            if weighted:
                for i in range(heard.size()):
                    c = heard[i]
                    if full or c == m or (radius > 0 and _within(w, c, m, length, radius)):
                        cands.push_back(c)
            else:
                for i in range(distinct.size()):
                    c = distinct[i]
                    if full or c == m or (radius > 0 and _within(w, c, m, length, radius)):
                        cands.push_back(c)
            sort(cands.begin(), cands.end())
            k = cands.size()
            if k > 1:
                wsel = cands[_below(rng, k)]
            else:
                wsel = cands[0]
            if mem[u].size() > 1:
                multi -= 1
            mem[u].clear()
            mem[u].push_back(wsel)
            old = conv[u]
            if wsel != old:
                d = 0
                for i in range(ip[u], ip[u + 1]):
                    v = conv[ix[i]]
                    d += _ham(w, wsel, v, length) - _ham(w, old, v, length)
                num += 2 * d
                conv[u] = wsel

        done += 1
        if stride > 0 and (t + 1) % stride == 0:
            sample_t.append(t + 1)
            sample_num.append(num)

    conveyed[:] = conv_arr
    for u in range(n):
        if mem[u].size() == 1:
            memories[u] = [mem[u][0]]
        else:
            memories[u] = sorted([mem[u][j] for j in range(mem[u].size())])
    return done, int(num), sample_t, sample_num
