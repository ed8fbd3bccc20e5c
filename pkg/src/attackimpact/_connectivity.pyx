# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernel for Monte Carlo reliability sampling.

Counts sampled link-state worlds in which two terminal nodes end up in the
same connected component. Must stay numerically interchangeable with
``_connectivity_py.count_connected_worlds``: given identical uniforms both
return identical counts.
"""

import numpy as np


cdef inline int _find(int* parent, int x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def count_connected_worlds(const double[:, ::1] uniforms,
                           const double[::1] weights,
                           const int[::1] edge_u,
                           const int[::1] edge_v,
                           int n_nodes, int src, int dst):
    """Number of rows of ``uniforms`` whose sampled world connects src to dst.

    An edge e is operative in row i when uniforms[i, e] < weights[e].
    """
    cdef Py_ssize_t n_samples = uniforms.shape[0]
    cdef Py_ssize_t n_edges = uniforms.shape[1]
    cdef long count = 0
    cdef Py_ssize_t i, e
    cdef int k, ru, rv

    if src == dst:
        return int(n_samples)

    parent_arr = np.empty(n_nodes, dtype=np.int32)
    cdef int[::1] parent_view = parent_arr
    cdef int* parent = &parent_view[0]

    with nogil:
        for i in range(n_samples):
            for k in range(n_nodes):
                parent[k] = k
            for e in range(n_edges):
                if uniforms[i, e] < weights[e]:
                    ru = _find(parent, edge_u[e])
                    rv = _find(parent, edge_v[e])
                    if ru != rv:
                        parent[ru] = rv
            if _find(parent, src) == _find(parent, dst):
                count += 1
    return int(count)
