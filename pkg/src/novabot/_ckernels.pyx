# cython: language_level=3
"""Compiled inner loops for the simulator.

Signatures and semantics match :mod:`novabot._pykernels` exactly; the
pure-Python module is the reference and the fallback.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, ceil

cnp.import_array()


def diffuse(double[:, ::1] grid not None, double[:, ::1] uptake not None,
            double diffusion, double decay, double spacing, double dt,
            long nsteps, double boundary):
    cdef Py_ssize_t ny = grid.shape[0]
    cdef Py_ssize_t nx = grid.shape[1]
    cdef Py_ssize_t i, j, row
    cdef long s
    cdef double r = diffusion * dt / (spacing * spacing)
    cdef double v
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch_arr = np.empty(ny * nx)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] self_arr = np.empty(ny * nx)
    cdef double[::1] flat = np.asarray(grid).reshape(-1)
    cdef double[::1] other = scratch_arr
    cdef double[::1] keep = self_arr
    cdef double *a
    cdef double *b
    cdef double *tmp
    cdef double *k

    if nsteps <= 0 or ny < 3 or nx < 3:
        return np.asarray(grid)
    for j in range(ny):
        for i in range(nx):
            row = j * nx + i
            other[row] = flat[row]
            keep[row] = 1.0 - 4.0 * r - dt * (decay + uptake[j, i])
    a = &flat[0]
    b = &other[0]
    k = &keep[0]
    with nogil:
        for s in range(nsteps):
            for j in range(1, ny - 1):
                row = j * nx
                for i in range(row + 1, row + nx - 1):
                    v = k[i] * a[i] + r * (a[i - nx] + a[i + nx] + a[i - 1] + a[i + 1])
                    v = v if v > 0.0 else 0.0
                    b[i] = v if v < boundary else boundary
            tmp = a
            a = b
            b = tmp
    if nsteps % 2 == 1:
        for i in range(ny * nx):
            flat[i] = other[i]
    return np.asarray(grid)


def deposit_nearest(double[:, ::1] pos not None, double[::1] weight not None,
                    const unsigned char[::1] mask not None, double origin,
                    double spacing, Py_ssize_t nx, Py_ssize_t ny):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.zeros((ny, nx))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t k, i, j
    for k in range(n):
        if not mask[k]:
            continue
        i = <Py_ssize_t>floor((pos[k, 0] - origin) / spacing + 0.5)
        j = <Py_ssize_t>floor((pos[k, 1] - origin) / spacing + 0.5)
        if i < 0:
            i = 0
        elif i >= nx:
            i = nx - 1
        if j < 0:
            j = 0
        elif j >= ny:
            j = ny - 1
        out[j, i] += weight[k]
    return out_arr


def pair_velocities(double[:, ::1] pos not None, double[::1] radius not None,
                    double[::1] rep not None, double[::1] adh not None,
                    const unsigned char[::1] active not None,
                    double max_rel_adhesion, double half_width):
    cdef Py_ssize_t n = pos.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vel_arr = np.zeros((n, 2))
    cdef double[:, ::1] vel = vel_arr
    if n == 0:
        return vel_arr

    cdef double rmax = 0.0
    cdef Py_ssize_t k
    for k in range(n):
        if active[k] and radius[k] > rmax:
            rmax = radius[k]
    if rmax <= 0.0:
        return vel_arr
    cdef double reach = max_rel_adhesion * 2.0 * rmax
    if reach < 2.0 * rmax:
        reach = 2.0 * rmax
    cdef double width = 2.0 * half_width
    cdef Py_ssize_t nb = <Py_ssize_t>ceil(width / reach)
    if nb < 1:
        nb = 1
    cdef double bin_w = width / nb

    cdef cnp.ndarray[cnp.intp_t, ndim=1] head_arr = np.full(nb * nb, -1, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] nxt_arr = np.full(n, -1, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] cell_bin_arr = np.full(n, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] head = head_arr
    cdef Py_ssize_t[::1] nxt = nxt_arr
    cdef Py_ssize_t[::1] cell_bin = cell_bin_arr
    cdef Py_ssize_t bx, by, b, ox, oy, qx, qy, i, j
    cdef double dx, dy, d2, d, rsum, ra, f, t
    cdef double xi, yi, srep_i, sadh_i, rad_i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] srep_arr = np.sqrt(np.asarray(rep))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sadh_arr = np.sqrt(np.asarray(adh))
    cdef double[::1] srep = srep_arr
    cdef double[::1] sadh = sadh_arr

    # reverse insertion keeps each bin's chain in ascending index order
    for k in range(n - 1, -1, -1):
        if not active[k]:
            continue
        bx = <Py_ssize_t>floor((pos[k, 0] + half_width) / bin_w)
        by = <Py_ssize_t>floor((pos[k, 1] + half_width) / bin_w)
        if bx < 0:
            bx = 0
        elif bx >= nb:
            bx = nb - 1
        if by < 0:
            by = 0
        elif by >= nb:
            by = nb - 1
        b = by * nb + bx
        cell_bin[k] = b
        nxt[k] = head[b]
        head[b] = k

    with nogil:
        for i in range(n):
            if cell_bin[i] < 0:
                continue
            bx = cell_bin[i] % nb
            by = cell_bin[i] // nb
            xi = pos[i, 0]
            yi = pos[i, 1]
            rad_i = radius[i]
            srep_i = srep[i]
            sadh_i = sadh[i]
            for oy in range(-1, 2):
                qy = by + oy
                if qy < 0 or qy >= nb:
                    continue
                for ox in range(-1, 2):
                    qx = bx + ox
                    if qx < 0 or qx >= nb:
                        continue
                    j = head[qy * nb + qx]
                    while j >= 0:
                        if j > i:
                            dx = xi - pos[j, 0]
                            dy = yi - pos[j, 1]
                            d2 = dx * dx + dy * dy
                            rsum = rad_i + radius[j]
                            ra = max_rel_adhesion * rsum
                            if d2 < ra * ra or d2 < rsum * rsum:
                                d = sqrt(d2)
                                if d < 1e-9:
                                    dx = 1.0
                                    dy = 0.0
                                    d = 1e-9
                                else:
                                    dx = dx / d
                                    dy = dy / d
                                f = 0.0
                                if d < rsum:
                                    t = 1.0 - d / rsum
                                    f = f + srep_i * srep[j] * t * t
                                if d < ra:
                                    t = 1.0 - d / ra
                                    f = f - sadh_i * sadh[j] * t * t
                                vel[i, 0] += f * dx
                                vel[i, 1] += f * dy
                                vel[j, 0] -= f * dx
                                vel[j, 1] -= f * dy
                        j = nxt[j]
    return vel_arr
