# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: union-find labeling, face-to-face spanning search and
lazy origin-cluster exploration on plane windows.

Every routine here has a pure-Python/scipy twin in ``_fallback`` with the
same signature and the same results.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline Py_ssize_t _find(Py_ssize_t* parent, Py_ssize_t x) noexcept nogil:
    cdef Py_ssize_t root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def label_components(object bits):
    """Label nearest-neighbour components of a Boolean array of any rank.

    Returns ``(labels, sizes)`` where labels are int32, 0 on closed sites,
    and components are numbered 1..K in order of their first site in
    row-major scan order.  ``sizes[k-1]`` is the size of component ``k``.
    """
    bits = np.asarray(bits)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] flat = np.ascontiguousarray(bits, dtype=np.uint8).ravel()
    cdef Py_ssize_t total = flat.shape[0]
    cdef int d = bits.ndim
    cdef cnp.ndarray[cnp.int64_t, ndim=1] shape = np.asarray(bits.shape, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stride = np.ones(d, dtype=np.int64)
    cdef int a
    for a in range(d - 2, -1, -1):
        stride[a] = stride[a + 1] * shape[a + 1]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] labels = np.zeros(total, dtype=np.int32)
    if total == 0:
        return labels.reshape(bits.shape), np.zeros(0, dtype=np.int64)
    cdef Py_ssize_t* parent = <Py_ssize_t*> malloc(total * sizeof(Py_ssize_t))
    cdef Py_ssize_t* size = <Py_ssize_t*> malloc(total * sizeof(Py_ssize_t))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] coord = np.zeros(d, dtype=np.int64)
    cdef Py_ssize_t i, j, ri, rj, s
    cdef int nlab = 0
    cdef list sizes = []
    try:
        with nogil:
            for i in range(total):
                parent[i] = i
                size[i] = 1
            for a in range(d):
                coord[a] = 0
            for i in range(total):
                if i > 0:
                    # odometer increment of the row-major coordinate
                    a = d - 1
                    coord[a] += 1
                    while coord[a] == shape[a]:
                        coord[a] = 0
                        a -= 1
                        coord[a] += 1
                if not flat[i]:
                    continue
                for a in range(d):
                    if coord[a] == 0:
                        continue
                    s = stride[a]
                    j = i - s
                    if not flat[j]:
                        continue
                    ri = _find(parent, i)
                    rj = _find(parent, j)
                    if ri == rj:
                        continue
                    if size[ri] < size[rj]:
                        ri, rj = rj, ri
                    parent[rj] = ri
                    size[ri] += size[rj]
        # canonical numbering: first site of each component in scan order
        for i in range(total):
            if not flat[i]:
                continue
            ri = _find(parent, i)
            if labels[ri] == 0:
                nlab += 1
                labels[ri] = nlab
                sizes.append(size[ri])
            labels[i] = labels[ri]
    finally:
        free(parent)
        free(size)
    return labels.reshape(bits.shape), np.asarray(sizes, dtype=np.int64)


def spans_axis(object bits, int axis):
    """True iff an open nearest-neighbour path joins the two faces
    orthogonal to ``axis`` (breadth-first search from the low face)."""
    bits = np.asarray(bits)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] flat = np.ascontiguousarray(bits, dtype=np.uint8).ravel()
    cdef Py_ssize_t total = flat.shape[0]
    cdef int d = bits.ndim
    cdef cnp.ndarray[cnp.int64_t, ndim=1] shape = np.asarray(bits.shape, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stride = np.ones(d, dtype=np.int64)
    cdef int a
    for a in range(d - 2, -1, -1):
        stride[a] = stride[a + 1] * shape[a + 1]
    if total == 0:
        return False
    cdef long long top = shape[axis] - 1
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen = np.zeros(total, dtype=np.uint8)
    cdef Py_ssize_t* queue = <Py_ssize_t*> malloc(total * sizeof(Py_ssize_t))
    cdef Py_ssize_t head = 0, tail = 0, i, j, s
    cdef long long c
    cdef bint found = False
    try:
        with nogil:
            for i in range(total):
                if flat[i] and (i // stride[axis]) % shape[axis] == 0:
                    seen[i] = 1
                    queue[tail] = i
                    tail += 1
            while head < tail and not found:
                i = queue[head]
                head += 1
                if (i // stride[axis]) % shape[axis] == top:
                    found = True
                    break
                for a in range(d):
                    s = stride[a]
                    c = (i // s) % shape[a]
                    if c > 0:
                        j = i - s
                        if flat[j] and not seen[j]:
                            seen[j] = 1
                            queue[tail] = j
                            tail += 1
                    if c < shape[a] - 1:
                        j = i + s
                        if flat[j] and not seen[j]:
                            seen[j] = 1
                            queue[tail] = j
                            tail += 1
    finally:
        free(queue)
    return bool(found)


def origin_reach3(object w1, object w2, object w3, int R):
    """Explore the origin cluster of a d=3 configuration inside ``B(R)``.

    ``w1`` is indexed ``[y+R, z+R]``, ``w2`` ``[x+R, z+R]`` and ``w3``
    ``[x+R, y+R]``.  Returns ``(reach, size)``: ``reach`` is the largest
    sup-norm of a cluster site (``-1`` if the origin is closed) and the
    search stops as soon as ``reach == R``, in which case ``size`` counts
    the sites seen so far.
    """
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] a1 = np.ascontiguousarray(w1, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] a2 = np.ascontiguousarray(w2, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] a3 = np.ascontiguousarray(w3, dtype=np.uint8)
    cdef int side = 2 * R + 1
    if a1.shape[0] != side or a1.shape[1] != side or a2.shape[0] != side or a3.shape[0] != side:
        raise ValueError("plane windows must have side 2R+1")
    if not (a1[R, R] and a2[R, R] and a3[R, R]):
        return -1, 0
    if R == 0:
        return 0, 1
    cdef Py_ssize_t total = <Py_ssize_t> side * side * side
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen = np.zeros(total, dtype=np.uint8)
    cdef Py_ssize_t cap = 1 << 16
    cdef int* queue = <int*> malloc(cap * 3 * sizeof(int))
    cdef int* grown
    cdef Py_ssize_t head = 0, tail = 0, idx
    cdef int x, y, z, nx, ny, nz, k, m, reach = 0
    cdef int dx[6]
    cdef int dy[6]
    cdef int dz[6]
    dx[:] = [1, -1, 0, 0, 0, 0]
    dy[:] = [0, 0, 1, -1, 0, 0]
    dz[:] = [0, 0, 0, 0, 1, -1]
    try:
        queue[0] = R
        queue[1] = R
        queue[2] = R
        tail = 1
        seen[(<Py_ssize_t> R * side + R) * side + R] = 1
        while head < tail and reach < R:
            x = queue[3 * head]
            y = queue[3 * head + 1]
            z = queue[3 * head + 2]
            head += 1
            for k in range(6):
                nx = x + dx[k]
                ny = y + dy[k]
                nz = z + dz[k]
                if nx < 0 or ny < 0 or nz < 0 or nx >= side or ny >= side or nz >= side:
                    continue
                idx = (<Py_ssize_t> nx * side + ny) * side + nz
                if seen[idx]:
                    continue
                if not (a1[ny, nz] and a2[nx, nz] and a3[nx, ny]):
                    continue
                seen[idx] = 1
                if tail == cap:
                    grown = <int*> malloc(cap * 6 * sizeof(int))
                    if grown == NULL:
                        raise MemoryError()
                    for m in range(cap * 3):
                        grown[m] = queue[m]
                    free(queue)
                    queue = grown
                    cap *= 2
                queue[3 * tail] = nx
                queue[3 * tail + 1] = ny
                queue[3 * tail + 2] = nz
                tail += 1
                m = abs(nx - R)
                if abs(ny - R) > m:
                    m = abs(ny - R)
                if abs(nz - R) > m:
                    m = abs(nz - R)
                if m > reach:
                    reach = m
    finally:
        free(queue)
    return reach, int(tail)
