# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled ray-cast kernel: per-pixel BVH traversal.

Arithmetic mirrors the numpy backend expression for expression (reciprocal
multiply, explicit componentwise cross/dot) and the build disables fp
contraction, so results are bit-identical to the fallback.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

def raycast_bvh(
    double[:, ::1] node_min not None,
    double[:, ::1] node_max not None,
    int[::1] left not None,
    int[::1] right not None,
    int[::1] start not None,
    int[::1] count not None,
    int[::1] order not None,
    double[:, ::1] e1 not None,
    double[:, ::1] e2 not None,
    double[:, ::1] tvec not None,
    double[:, ::1] q not None,
    double[::1] tq not None,
    double[::1] origin not None,
    double[:, :, ::1] dirs not None,
):
    cdef Py_ssize_t h = dirs.shape[0]
    cdef Py_ssize_t w = dirs.shape[1]
    t_out = np.full((h, w), np.inf)
    tri_out = np.full((h, w), -1, dtype=np.int32)
    u_out = np.zeros((h, w))
    v_out = np.zeros((h, w))
    cdef double[:, ::1] tv = t_out
    cdef int[:, ::1] triv = tri_out
    cdef double[:, ::1] uv = u_out
    cdef double[:, ::1] vv = v_out

    cdef double ox = origin[0]
    cdef double oy = origin[1]
    cdef double oz = origin[2]

    cdef int stack[64]
    cdef int sp, node, axis_kk, k
    cdef Py_ssize_t i, j, kk
    cdef double dx, dy, dz
    cdef double tnear, tfar, t0, t1, tmp, o_c, d_c, lo, hi
    cdef double e1x, e1y, e1z, e2x, e2y, e2z, tx, ty, tz, qx, qy, qz
    cdef double px, py, pz, det, inv, u, v, t
    cdef double best_t, bu, bv
    cdef int best_i
    cdef bint boxhit

    with nogil:
        for i in range(h):
            for j in range(w):
                dx = dirs[i, j, 0]
                dy = dirs[i, j, 1]
                dz = dirs[i, j, 2]
                best_t = tv[i, j]
                best_i = -1
                bu = 0.0
                bv = 0.0
                sp = 1
                stack[0] = 0
                while sp > 0:
                    sp -= 1
                    node = stack[sp]
                    # slab test; boxes whose entry lies beyond the current
                    # best (plus margin) cannot improve the hit
                    tnear = 1e-9
                    tfar = best_t + 1e-9
                    boxhit = True
                    for axis_kk in range(3):
                        if axis_kk == 0:
                            o_c = ox; d_c = dx
                        elif axis_kk == 1:
                            o_c = oy; d_c = dy
                        else:
                            o_c = oz; d_c = dz
                        lo = node_min[node, axis_kk]
                        hi = node_max[node, axis_kk]
                        if d_c != 0.0:
                            t0 = (lo - o_c) / d_c
                            t1 = (hi - o_c) / d_c
                            if t0 > t1:
                                tmp = t0; t0 = t1; t1 = tmp
                            if t0 > tnear:
                                tnear = t0
                            if t1 < tfar:
                                tfar = t1
                        elif o_c < lo or o_c > hi:
                            boxhit = False
                            break
                    if (not boxhit) or tnear > tfar:
                        continue
                    if left[node] < 0:
                        for kk in range(start[node], start[node] + count[node]):
                            k = order[kk]
                            e1x = e1[k, 0]; e1y = e1[k, 1]; e1z = e1[k, 2]
                            e2x = e2[k, 0]; e2y = e2[k, 1]; e2z = e2[k, 2]
                            px = dy * e2z - dz * e2y
                            py = dz * e2x - dx * e2z
                            pz = dx * e2y - dy * e2x
                            det = e1x * px + e1y * py + e1z * pz
                            if fabs(det) < 1e-12:
                                continue
                            inv = 1.0 / det
                            tx = tvec[k, 0]; ty = tvec[k, 1]; tz = tvec[k, 2]
                            u = (tx * px + ty * py + tz * pz) * inv
                            if u < 0.0:
                                continue
                            qx = q[k, 0]; qy = q[k, 1]; qz = q[k, 2]
                            v = (dx * qx + dy * qy + dz * qz) * inv
                            if v < 0.0 or u + v > 1.0:
                                continue
                            t = tq[k] * inv
                            if t <= 1e-9:
                                continue
                            if t < best_t or (t == best_t and k < best_i):
                                best_t = t
                                best_i = k
                                bu = u
                                bv = v
                    else:
                        stack[sp] = right[node]
                        sp += 1
                        stack[sp] = left[node]
                        sp += 1
                tv[i, j] = best_t
                triv[i, j] = best_i
                uv[i, j] = bu
                vv[i, j] = bv
    return t_out, tri_out, u_out, v_out
