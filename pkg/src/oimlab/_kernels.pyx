# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: RK4 phase integration, cyclic Jacobi, spin enumeration.

Every function here mirrors one in ``oimlab._fallback`` with the same
signature and return layout. ``oimlab._backend`` picks one at import.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs, isfinite

cnp.import_array()

NAME = "cython"


cdef inline double _velocity(const double[:, ::1] w, double k, double ks,
                             const double[::1] theta, double[::1] out,
                             double[::1] sn, double[::1] cs) noexcept nogil:
    """Fill ``out`` with the phase velocity; return its infinity norm."""
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t i, j
    cdef double a, b, fi, norm = 0.0
    for j in range(n):
        sn[j] = sin(theta[j])
        cs[j] = cos(theta[j])
    for i in range(n):
        a = 0.0
        b = 0.0
        for j in range(n):
            a = a + w[i, j] * cs[j]
            b = b + w[i, j] * sn[j]
        # sum_j W_ij sin(t_i - t_j) = sin t_i * sum W_ij cos t_j - cos t_i * sum W_ij sin t_j
        fi = -k * (sn[i] * a - cs[i] * b) - ks * sin(2.0 * theta[i])
        out[i] = fi
        if not isfinite(fi):
            norm = fi
        elif isfinite(norm) and fabs(fi) > norm:
            norm = fabs(fi)
    return norm


cdef _check_shapes(const double[:, ::1] w, Py_ssize_t n):
    if w.shape[0] != n or w.shape[1] != n:
        raise ValueError(f"coupling matrix is {w.shape[0]}x{w.shape[1]}, expected {n}x{n}")


def velocity(const double[:, ::1] w, double k, double ks, const double[::1] theta):
    cdef Py_ssize_t n = theta.shape[0]
    _check_shapes(w, n)
    out_np = np.empty(n)
    cdef double[::1] out = out_np
    cdef double[::1] sn = np.empty(n)
    cdef double[::1] cs = np.empty(n)
    with nogil:
        _velocity(w, k, ks, theta, out, sn, cs)
    return out_np


def rk4_run(const double[:, ::1] w, double k, double ks, const double[::1] theta0,
            double dt, Py_ssize_t n_steps, double stop_tol, Py_ssize_t stride):
    """Fixed-step RK4 from ``theta0``.

    Returns ``(steps, states, converged, final_norm, bad_step)`` where
    ``steps`` holds the step index of every recorded row of ``states`` and
    ``bad_step`` is -1 unless a non-finite state was produced.
    """
    cdef Py_ssize_t n = theta0.shape[0]
    _check_shapes(w, n)
    if stride < 1 or n_steps < 0:
        raise ValueError("stride must be >= 1 and n_steps >= 0")
    cdef Py_ssize_t cap = n_steps // stride + 2
    rec_np = np.empty((cap, n))
    steps_np = np.empty(cap, dtype=np.int64)
    cdef double[:, ::1] rec = rec_np
    cdef long long[::1] steps = steps_np
    cdef double[::1] th = np.array(theta0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] k1 = np.empty(n)
    cdef double[::1] k2 = np.empty(n)
    cdef double[::1] k3 = np.empty(n)
    cdef double[::1] k4 = np.empty(n)
    cdef double[::1] sn = np.empty(n)
    cdef double[::1] cs = np.empty(n)
    cdef Py_ssize_t m = 0, step = 0, i
    cdef Py_ssize_t bad = -1
    cdef bint converged = False
    cdef double norm, h2 = 0.5 * dt, h6 = dt / 6.0

    with nogil:
        norm = _velocity(w, k, ks, th, k1, sn, cs)
        for i in range(n):
            rec[0, i] = th[i]
        steps[0] = 0
        m = 1
        if not isfinite(norm):
            bad = 0
        elif norm < stop_tol:
            converged = True
        else:
            for step in range(1, n_steps + 1):
                for i in range(n):
                    tmp[i] = th[i] + h2 * k1[i]
                _velocity(w, k, ks, tmp, k2, sn, cs)
                for i in range(n):
                    tmp[i] = th[i] + h2 * k2[i]
                _velocity(w, k, ks, tmp, k3, sn, cs)
                for i in range(n):
                    tmp[i] = th[i] + dt * k3[i]
                _velocity(w, k, ks, tmp, k4, sn, cs)
                for i in range(n):
                    th[i] = th[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                # k1 of the next step doubles as the stopping residual
                norm = _velocity(w, k, ks, th, k1, sn, cs)
                if not isfinite(norm):
                    bad = step
                    break
                if norm < stop_tol or step % stride == 0 or step == n_steps:
                    for i in range(n):
                        rec[m, i] = th[i]
                    steps[m] = step
                    m = m + 1
                if norm < stop_tol:
                    converged = True
                    break
    return steps_np[:m].copy(), rec_np[:m].copy(), bool(converged), norm, bad


def jacobi_eigh(const double[:, ::1] a_in, double rel_tol, Py_ssize_t max_sweeps):
    """Cyclic Jacobi rotations on a symmetric matrix.

    Returns ``(values, vectors, sweeps)``; ``sweeps`` is -1 when the
    off-diagonal mass did not drop below ``rel_tol * ||A||_F``.
    """
    cdef Py_ssize_t n = a_in.shape[0]
    _check_shapes(a_in, n)
    a_np = np.array(a_in, dtype=np.float64)
    v_np = np.eye(n)
    cdef double[:, ::1] a = a_np
    cdef double[:, ::1] v = v_np
    cdef Py_ssize_t p, q, r, sweep, done = -1
    cdef double fro = 0.0, off, apq, theta, t, c, s, arp, arq
    with nogil:
        for p in range(n):
            for q in range(n):
                fro = fro + a[p, q] * a[p, q]
        fro = sqrt(fro)
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        off = off + a[p, q] * a[p, q]
            if sqrt(off) <= rel_tol * fro:
                done = sweep
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    elif theta >= 0.0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for r in range(n):
                        if r != p and r != q:
                            arp = a[r, p]
                            arq = a[r, q]
                            a[r, p] = c * arp - s * arq
                            a[p, r] = a[r, p]
                            a[r, q] = s * arp + c * arq
                            a[q, r] = a[r, q]
                    a[p, p] = a[p, p] - t * apq
                    a[q, q] = a[q, q] + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for r in range(n):
                        arp = v[r, p]
                        arq = v[r, q]
                        v[r, p] = c * arp - s * arq
                        v[r, q] = s * arp + c * arq
    return np.diag(a_np).copy(), v_np, done


def spin_energies(const double[:, ::1] w):
    """Ising energy of every spin config; bit i of the index set means s_i = -1."""
    cdef Py_ssize_t n = w.shape[0]
    _check_shapes(w, n)
    cdef Py_ssize_t total = (<Py_ssize_t>1) << n
    out_np = np.empty(total)
    cdef double[::1] out = out_np
    cdef double[::1] s = np.empty(n)
    cdef Py_ssize_t b, i, j
    cdef double e, row
    with nogil:
        for b in range(total):
            for i in range(n):
                s[i] = -1.0 if (b >> i) & 1 else 1.0
            e = 0.0
            for i in range(n):
                row = 0.0
                for j in range(i + 1, n):
                    row = row + w[i, j] * s[j]
                e = e + s[i] * row
            out[b] = -e
    return out_np
