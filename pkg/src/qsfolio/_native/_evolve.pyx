# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled evolution loop: repeated Kraus channel steps driven by BLAS.

Mirrors ``qsfolio.engine._loops.evolve_to_stationary`` operation for
operation; the convergence check is the entrywise 1-norm of the step
difference. Row-major buffers are fed to Fortran BLAS with the usual
transposition trick (``(AB)^T = B^T A^T``).
"""

import numpy as np

from libc.math cimport hypot
from scipy.linalg.cython_blas cimport dgemv, zgemm

MODE_ALG = 0
MODE_EQ = 1


def evolve_to_stationary(unitary, sqrt_keep, gamma, rho0, int mode,
                         double tol, int max_iters):
    """Iterate the channel; returns ``(rho, iterations, converged, delta)``."""
    cdef int n = rho0.shape[0]

    k0_arr = np.ascontiguousarray(
        np.asarray(unitary, dtype=complex)
        * np.asarray(sqrt_keep, dtype=float)[None, :])
    u_arr = np.ascontiguousarray(unitary, dtype=complex)
    sk_arr = np.ascontiguousarray(sqrt_keep, dtype=float)
    gam_arr = np.ascontiguousarray(gamma, dtype=float)
    cur_arr = np.array(rho0, dtype=complex, order="C")
    nxt_arr = np.empty_like(cur_arr)
    tmp_arr = np.empty_like(cur_arr)
    p_arr = np.empty(n, dtype=float)
    jump_arr = np.empty(n, dtype=float)

    cdef double complex[:, ::1] k0v = k0_arr
    cdef double complex[:, ::1] uv = u_arr
    cdef double[::1] skv = sk_arr
    cdef double[:, ::1] gamv = gam_arr
    cdef double complex[:, ::1] curv = cur_arr
    cdef double complex[:, ::1] nxtv = nxt_arr
    cdef double complex[:, ::1] tmpv = tmp_arr
    cdef double[::1] pv = p_arr
    cdef double[::1] jumpv = jump_arr

    cdef double complex *k0p = &k0v[0, 0]
    cdef double complex *up = &uv[0, 0]
    cdef double complex *cur = &curv[0, 0]
    cdef double complex *nxt = &nxtv[0, 0]
    cdef double complex *tmp = &tmpv[0, 0]
    cdef double complex *swap
    cdef double *skp = &skv[0]
    cdef double *gamp = &gamv[0, 0]
    cdef double *pp = &pv[0]
    cdef double *jumpp = &jumpv[0]

    cdef double complex cone = 1.0
    cdef double complex czero = 0.0
    cdef double done = 1.0
    cdef double dzero = 0.0
    cdef int ione = 1
    cdef char trans_n = b'N'
    cdef char trans_t = b'T'
    cdef char trans_c = b'C'

    cdef Py_ssize_t i, j
    cdef int it = 0
    cdef int mode_eq = MODE_EQ
    cdef bint converged = False
    cdef bint flipped = False
    cdef double delta = 0.0
    cdef double tr, inv, scale
    cdef double complex z

    with nogil:
        for it in range(1, max_iters + 1):
            if mode == mode_eq:
                for j in range(n):
                    pp[j] = cur[j * n + j].real
                # jump = Gamma @ p  (row-major Gamma => 'T' on its F view)
                dgemv(&trans_t, &n, &n, &done, gamp, &n, pp, &ione,
                      &dzero, jumpp, &ione)
                # tmp = K0 @ cur ; nxt = tmp @ K0^H
                zgemm(&trans_n, &trans_n, &n, &n, &n, &cone, cur, &n,
                      k0p, &n, &czero, tmp, &n)
                zgemm(&trans_c, &trans_n, &n, &n, &n, &cone, k0p, &n,
                      tmp, &n, &czero, nxt, &n)
                for j in range(n):
                    nxt[j * n + j] = nxt[j * n + j] + jumpp[j]
            else:
                # sigma = U @ cur @ U^H, stored in nxt
                zgemm(&trans_n, &trans_n, &n, &n, &n, &cone, cur, &n,
                      up, &n, &czero, tmp, &n)
                zgemm(&trans_c, &trans_n, &n, &n, &n, &cone, up, &n,
                      tmp, &n, &czero, nxt, &n)
                for j in range(n):
                    pp[j] = nxt[j * n + j].real
                dgemv(&trans_t, &n, &n, &done, gamp, &n, pp, &ione,
                      &dzero, jumpp, &ione)
                for i in range(n):
                    for j in range(n):
                        scale = skp[i] * skp[j]
                        nxt[i * n + j] = nxt[i * n + j] * scale
                for j in range(n):
                    nxt[j * n + j] = nxt[j * n + j] + jumpp[j]
                tr = 0.0
                for j in range(n):
                    tr += nxt[j * n + j].real
                inv = 1.0 / tr
                for i in range(n * n):
                    nxt[i] = nxt[i] * inv

            delta = 0.0
            for i in range(n * n):
                z = nxt[i] - cur[i]
                delta += hypot(z.real, z.imag)

            swap = cur
            cur = nxt
            nxt = swap
            flipped = not flipped

            if delta <= tol:
                converged = True
                break

    out = nxt_arr if flipped else cur_arr
    return out, it, bool(converged), delta
