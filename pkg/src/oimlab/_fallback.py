"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Signatures and return layouts match the extension exactly so callers never
need to know which backend is active.
"""
import math

import numpy as np

NAME = "python"


def velocity(w, k, ks, theta):
    sn = np.sin(theta)
    cs = np.cos(theta)
    return -k * (sn * (w @ cs) - cs * (w @ sn)) - ks * np.sin(2.0 * theta)


def _norm(f):
    if not np.all(np.isfinite(f)):
        return math.nan
    return float(np.max(np.abs(f))) if f.size else 0.0


def rk4_run(w, k, ks, theta0, dt, n_steps, stop_tol, stride):
    # non-finite states are reported through ``bad``, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4_run(w, k, ks, theta0, dt, n_steps, stop_tol, stride)


def _rk4_run(w, k, ks, theta0, dt, n_steps, stop_tol, stride):
    th = np.array(theta0, dtype=np.float64)
    k1 = velocity(w, k, ks, th)
    norm = _norm(k1)
    steps = [0]
    rec = [th.copy()]
    if not math.isfinite(norm):
        return np.array(steps, dtype=np.int64), np.array(rec), False, norm, 0
    if norm < stop_tol:
        return np.array(steps, dtype=np.int64), np.array(rec), True, norm, -1
    converged = False
    bad = -1
    for step in range(1, n_steps + 1):
        k2 = velocity(w, k, ks, th + 0.5 * dt * k1)
        k3 = velocity(w, k, ks, th + 0.5 * dt * k2)
        k4 = velocity(w, k, ks, th + dt * k3)
        th = th + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        k1 = velocity(w, k, ks, th)
        norm = _norm(k1)
        if not math.isfinite(norm):
            bad = step
            break
        if norm < stop_tol or step % stride == 0 or step == n_steps:
            steps.append(step)
            rec.append(th.copy())
        if norm < stop_tol:
            converged = True
            break
    return np.array(steps, dtype=np.int64), np.array(rec), converged, norm, bad


def jacobi_eigh(a_in, rel_tol, max_sweeps):
    a = np.array(a_in, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    fro = math.sqrt(float(np.sum(a * a)))
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(float(np.sum((a - np.diag(np.diag(a))) ** 2)))
        if off <= rel_tol * fro:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    # theta**2 would overflow; t -> 1 / (2 theta)
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, :] = a[:, p]
                a[q, :] = a[:, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, -1


def spin_energies(w, chunk=1 << 14):
    n = w.shape[0]
    total = 1 << n
    out = np.empty(total)
    upper = np.triu(w, 1)
    bits = np.arange(n)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        s = 1.0 - 2.0 * ((idx[:, None] >> bits) & 1)
        out[start:start + len(idx)] = -np.einsum("bi,ij,bj->b", s, upper, s)
    return out
