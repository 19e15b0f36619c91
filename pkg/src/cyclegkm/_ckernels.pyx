# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of cyclegkm.kernels.enumerate_closed_py."""

from libc.stdlib cimport malloc, free


cdef struct State:
    int nlab
    int *succ_off
    int *succ_idx
    int *vertex
    int *target
    int *order
    int *count
    int *remaining
    char *inside


cdef void _rec(State *st, int pos, list out):
    cdef int x, v, j, ok
    if pos == st.nlab:
        out.append(tuple([i for i in range(st.nlab) if st.inside[i]]))
        return
    x = st.order[pos]
    v = st.vertex[x]
    st.remaining[v] -= 1
    if st.count[v] < st.target[v]:
        ok = 1
        for j in range(st.succ_off[x], st.succ_off[x + 1]):
            if not st.inside[st.succ_idx[j]]:
                ok = 0
                break
        if ok:
            st.inside[x] = 1
            st.count[v] += 1
            _rec(st, pos + 1, out)
            st.count[v] -= 1
            st.inside[x] = 0
    if st.count[v] + st.remaining[v] >= st.target[v]:
        _rec(st, pos + 1, out)
    st.remaining[v] += 1


def enumerate_closed(list succ, list vertex, list target, list order):
    cdef int nlab = len(vertex)
    cdef int nv = len(target)
    cdef int nsucc = sum(len(s) for s in succ)
    cdef State st
    cdef int i, k, pos
    cdef list out = []
    st.nlab = nlab
    st.succ_off = <int *> malloc((nlab + 1) * sizeof(int))
    st.succ_idx = <int *> malloc((nsucc + 1) * sizeof(int))
    st.vertex = <int *> malloc((nlab + 1) * sizeof(int))
    st.order = <int *> malloc((nlab + 1) * sizeof(int))
    st.inside = <char *> malloc((nlab + 1) * sizeof(char))
    st.target = <int *> malloc((nv + 1) * sizeof(int))
    st.count = <int *> malloc((nv + 1) * sizeof(int))
    st.remaining = <int *> malloc((nv + 1) * sizeof(int))
    try:
        pos = 0
        for i in range(nlab):
            st.succ_off[i] = pos
            for k in succ[i]:
                st.succ_idx[pos] = k
                pos += 1
            st.vertex[i] = vertex[i]
            st.order[i] = order[i]
            st.inside[i] = 0
        st.succ_off[nlab] = pos
        for i in range(nv):
            st.target[i] = target[i]
            st.count[i] = 0
            st.remaining[i] = 0
        for i in range(nlab):
            st.remaining[st.vertex[i]] += 1
        for i in range(nv):
            if st.remaining[i] < st.target[i]:
                return out
        _rec(&st, 0, out)
    finally:
        free(st.succ_off)
        free(st.succ_idx)
        free(st.vertex)
        free(st.order)
        free(st.inside)
        free(st.target)
        free(st.count)
        free(st.remaining)
    return out
