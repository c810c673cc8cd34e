"""Hot numeric kernels for the network simulation.

Every function here operates on plain numpy arrays and scalars, is written as
explicit loops (deterministic summation order, no BLAS reductions on the data
path), and is compiled with numba ``@njit`` unless the ``DCESIM_NUMBA=0``
fallback is selected.  The public modules wrap these kernels behind the
documented domain types; the experiment engine calls them directly.
"""

import numpy as np

from ._accel import BACKEND, jit_kernel

__all__ = [
    "BACKEND",
    "PHI_DIVERGENCE_LIMIT",
    "OMP_RANK_RTOL",
    "ar1_series",
    "matvec",
    "conj_inner",
    "compress_series",
    "measure_series_full",
    "measure_series_compressed",
    "quantize_rows",
    "adapt_block",
    "combine_all",
    "combine_quantized",
    "omp_core",
    "decompress_all",
    "run_full_dim",
    "run_compressed_fixed",
    "run_compressed_opt",
]

# Any measurement-matrix entry beyond this magnitude aborts the run as diverged.
PHI_DIVERGENCE_LIMIT = 1e6

# A newly selected column whose QR diagonal falls below this fraction of the
# first diagonal is treated as linearly dependent and dropped.
OMP_RANK_RTOL = 1e-10


@jit_kernel
def ar1_series(u, alpha):
    """First-order autoregression x[t] = u[t] + alpha*x[t-1], zero initial state."""
    n = u.shape[0]
    out = np.empty(n, dtype=np.complex128)
    prev = 0.0 + 0.0j
    for t in range(n):
        prev = u[t] + alpha * prev
        out[t] = prev
    return out


@jit_kernel
def matvec(a, v):
    rows, cols = a.shape
    out = np.empty(rows, dtype=np.complex128)
    for r in range(rows):
        acc = 0.0 + 0.0j
        for c in range(cols):
            acc += a[r, c] * v[c]
        out[r] = acc
    return out


@jit_kernel
def conj_inner(a, b):
    """Hermitian inner product a^H b."""
    acc = 0.0 + 0.0j
    for i in range(a.shape[0]):
        acc += np.conj(a[i]) * b[i]
    return acc


@jit_kernel
def compress_series(xs_pad, phis, m):
    """Compressed regressor series for every node and iteration.

    xs_pad[k] holds the scalar input sequence of node k left-padded with m-1
    zeros, so the regressor window at iteration i is
    [x(i), x(i-1), ..., x(i-m+1)] = xs_pad[k, i+m-1 .. i].
    Returns xbars with shape (n_nodes, n_iter, d).
    """
    n_nodes = xs_pad.shape[0]
    n_iter = xs_pad.shape[1] - m + 1
    dd = phis.shape[1]
    out = np.empty((n_nodes, n_iter, dd), dtype=np.complex128)
    for k in range(n_nodes):
        for i in range(n_iter):
            for dx in range(dd):
                acc = 0.0 + 0.0j
                for j in range(m):
                    acc += phis[k, dx, j] * xs_pad[k, i + m - 1 - j]
                out[k, i, dx] = acc
    return out


@jit_kernel
def measure_series_full(xs_pad, w, noise, m):
    """Scalar measurements d[k,i] = w[k]^H window_k(i) + noise[k,i]."""
    n_nodes = xs_pad.shape[0]
    n_iter = xs_pad.shape[1] - m + 1
    out = np.empty((n_nodes, n_iter), dtype=np.complex128)
    for k in range(n_nodes):
        for i in range(n_iter):
            acc = 0.0 + 0.0j
            for j in range(m):
                acc += np.conj(w[k, j]) * xs_pad[k, i + m - 1 - j]
            out[k, i] = acc + noise[k, i]
    return out


@jit_kernel
def measure_series_compressed(xbars, obar0, noise):
    """Scalar measurements d[k,i] = obar0[k]^H xbars[k,i] + noise[k,i]."""
    n_nodes, n_iter, dd = xbars.shape
    out = np.empty((n_nodes, n_iter), dtype=np.complex128)
    for k in range(n_nodes):
        for i in range(n_iter):
            acc = 0.0 + 0.0j
            for dx in range(dd):
                acc += np.conj(obar0[k, dx]) * xbars[k, i, dx]
            out[k, i] = acc + noise[k, i]
    return out


@jit_kernel
def quantize_rows(v, bits_re, bits_im, clip, out):
    """Uniform mid-rise quantizer per real/imag part over [-clip, clip].

    Values beyond the clip range saturate to the boundary cell centers.
    A zero-bit part collapses to the single level at 0.
    """
    rows, cols = v.shape
    nr = 2 ** bits_re
    ni = 2 ** bits_im
    sr = 2.0 * clip / nr
    si = 2.0 * clip / ni
    for r in range(rows):
        for c in range(cols):
            re = v[r, c].real
            im = v[r, c].imag
            mr = int(np.floor((re + clip) / sr))
            if mr < 0:
                mr = 0
            elif mr > nr - 1:
                mr = nr - 1
            mi = int(np.floor((im + clip) / si))
            if mi < 0:
                mi = 0
            elif mi > ni - 1:
                mi = ni - 1
            out[r, c] = (-clip + (mr + 0.5) * sr) + 1j * (-clip + (mi + 0.5) * si)


@jit_kernel
def adapt_block(omegas, xrows, d, mu0, eps, rho, psis, errs):
    """Normalized-LMS adaptation for all nodes, optional zero-attracting term.

    errs receives the a-priori errors e_k = d_k - omega_k^H x_k and
    psis[k] = omega_k + mu0/(||x_k||^2 + eps) * conj(e_k) * x_k
              - rho * csign(omega_k)
    where csign applies the sign function to real and imaginary parts
    independently.  rho = 0 skips the shrinkage term entirely.
    """
    n, L = omegas.shape
    for k in range(n):
        e = d[k]
        nrm = 0.0
        for j in range(L):
            e -= np.conj(omegas[k, j]) * xrows[k, j]
            re = xrows[k, j].real
            im = xrows[k, j].imag
            nrm += re * re + im * im
        mu = mu0 / (nrm + eps)
        ce = np.conj(e)
        for j in range(L):
            psis[k, j] = omegas[k, j] + mu * ce * xrows[k, j]
        if rho != 0.0:
            for j in range(L):
                wre = omegas[k, j].real
                wim = omegas[k, j].imag
                sr = 0.0
                if wre > 0.0:
                    sr = 1.0
                elif wre < 0.0:
                    sr = -1.0
                si = 0.0
                if wim > 0.0:
                    si = 1.0
                elif wim < 0.0:
                    si = -1.0
                psis[k, j] -= rho * (sr + 1j * si)
        errs[k] = e


@jit_kernel
def combine_all(weights, psis, out):
    """out[k] = sum_l weights[k, l] * psis[l] (fixed summation order)."""
    n, L = psis.shape
    for k in range(n):
        for j in range(L):
            acc = 0.0 + 0.0j
            for l in range(n):
                acc += weights[k, l] * psis[l, j]
            out[k, j] = acc


@jit_kernel
def combine_quantized(weights, psis, psis_q, out):
    """Combination using the node's own raw psi and neighbours' quantized ones."""
    n, L = psis.shape
    for k in range(n):
        for j in range(L):
            acc = 0.0 + 0.0j
            for l in range(n):
                if l == k:
                    acc += weights[k, l] * psis[l, j]
                else:
                    acc += weights[k, l] * psis_q[l, j]
            out[k, j] = acc


@jit_kernel
def omp_core(phi, y, max_support, residual_tol, rank_rtol):
    """Orthogonal matching pursuit with norm-weighted correlation scoring.

    Greedy loop: pick the column maximizing |phi_j^H r| / ||phi_j|| (ties go
    to the smallest index, zero columns score 0), refit y on all selected
    columns by QR least squares, update the residual.  Stops at max_support
    columns, when ||r|| <= residual_tol, when the residual is orthogonal to
    every remaining column, or when a selected column turns out linearly
    dependent (that column is dropped and the stalled flag is set).

    Returns (coeffs length-M, support indices in selection order, stalled).
    """
    D, M = phi.shape
    coeffs = np.zeros(M, dtype=np.complex128)
    support = np.empty(max_support, dtype=np.int64)
    stalled = False

    col_norm = np.empty(M, dtype=np.float64)
    for j in range(M):
        acc = 0.0
        for dx in range(D):
            re = phi[dx, j].real
            im = phi[dx, j].imag
            acc += re * re + im * im
        col_norm[j] = np.sqrt(acc)

    selected = np.zeros(M, dtype=np.bool_)
    r = y.copy()
    A = np.empty((D, max_support), dtype=np.complex128)
    c = np.zeros(max_support, dtype=np.complex128)
    nsel = 0
    while nsel < max_support:
        rnorm = 0.0
        for dx in range(D):
            re = r[dx].real
            im = r[dx].imag
            rnorm += re * re + im * im
        if np.sqrt(rnorm) <= residual_tol:
            break
        best = -1
        best_score = 0.0
        for j in range(M):
            if selected[j] or col_norm[j] == 0.0:
                continue
            acc = 0.0 + 0.0j
            for dx in range(D):
                acc += np.conj(phi[dx, j]) * r[dx]
            score = np.abs(acc) / col_norm[j]
            if score > best_score:
                best_score = score
                best = j
        if best < 0 or best_score <= 0.0:
            break
        for dx in range(D):
            A[dx, nsel] = phi[dx, best]
        t = nsel + 1
        Q, R = np.linalg.qr(np.ascontiguousarray(A[:, :t]))
        if np.abs(R[t - 1, t - 1]) <= rank_rtol * np.abs(R[0, 0]):
            stalled = True
            break
        selected[best] = True
        support[nsel] = best
        nsel = t
        for j in range(nsel):
            acc = 0.0 + 0.0j
            for dx in range(D):
                acc += np.conj(Q[dx, j]) * y[dx]
            c[j] = acc
        for j in range(nsel - 1, -1, -1):
            acc = c[j]
            for l in range(j + 1, nsel):
                acc -= R[j, l] * c[l]
            c[j] = acc / R[j, j]
        for dx in range(D):
            acc = y[dx]
            for l in range(nsel):
                acc -= A[dx, l] * c[l]
            r[dx] = acc
    for t in range(nsel):
        coeffs[support[t]] = c[t]
    return coeffs, support[:nsel].copy(), stalled


@jit_kernel
def decompress_all(phis, omegas, max_support, residual_tol, rank_rtol):
    """Per-node OMP reconstruction of compressed estimates back to M dims."""
    n_nodes = phis.shape[0]
    m = phis.shape[2]
    out = np.empty((n_nodes, m), dtype=np.complex128)
    for k in range(n_nodes):
        coeffs, _sup, _st = omp_core(phis[k], omegas[k], max_support,
                                     residual_tol, rank_rtol)
        for j in range(m):
            out[k, j] = coeffs[j]
    return out


@jit_kernel
def run_full_dim(xs_pad, d, weights, mu0, eps, rho, m,
                 quant_on, bits_re, bits_im, clip):
    """Adapt-then-combine diffusion in the full M-dimensional space.

    Returns (err2 with shape (n_iter, n_nodes), final estimates (n_nodes, m)).
    """
    n_nodes = xs_pad.shape[0]
    n_iter = xs_pad.shape[1] - m + 1
    omegas = np.zeros((n_nodes, m), dtype=np.complex128)
    psis = np.empty((n_nodes, m), dtype=np.complex128)
    psis_q = np.empty((n_nodes, m), dtype=np.complex128)
    nxt = np.empty((n_nodes, m), dtype=np.complex128)
    xrows = np.empty((n_nodes, m), dtype=np.complex128)
    errs = np.empty(n_nodes, dtype=np.complex128)
    err2 = np.empty((n_iter, n_nodes), dtype=np.float64)
    for i in range(n_iter):
        for k in range(n_nodes):
            for j in range(m):
                xrows[k, j] = xs_pad[k, i + m - 1 - j]
        adapt_block(omegas, xrows, d[:, i], mu0, eps, rho, psis, errs)
        for k in range(n_nodes):
            re = errs[k].real
            im = errs[k].imag
            err2[i, k] = re * re + im * im
        if quant_on:
            quantize_rows(psis, bits_re, bits_im, clip, psis_q)
            combine_quantized(weights, psis, psis_q, nxt)
        else:
            combine_all(weights, psis, nxt)
        for k in range(n_nodes):
            for j in range(m):
                omegas[k, j] = nxt[k, j]
    return err2, omegas


@jit_kernel
def run_compressed_fixed(xbars, d, weights, mu0, eps,
                         quant_on, bits_re, bits_im, clip):
    """Adapt-then-combine diffusion in the compressed D-dimensional space."""
    n_nodes, n_iter, dd = xbars.shape
    omegas = np.zeros((n_nodes, dd), dtype=np.complex128)
    psis = np.empty((n_nodes, dd), dtype=np.complex128)
    psis_q = np.empty((n_nodes, dd), dtype=np.complex128)
    nxt = np.empty((n_nodes, dd), dtype=np.complex128)
    xrows = np.empty((n_nodes, dd), dtype=np.complex128)
    errs = np.empty(n_nodes, dtype=np.complex128)
    err2 = np.empty((n_iter, n_nodes), dtype=np.float64)
    for i in range(n_iter):
        for k in range(n_nodes):
            for j in range(dd):
                xrows[k, j] = xbars[k, i, j]
        adapt_block(omegas, xrows, d[:, i], mu0, eps, 0.0, psis, errs)
        for k in range(n_nodes):
            re = errs[k].real
            im = errs[k].imag
            err2[i, k] = re * re + im * im
        if quant_on:
            quantize_rows(psis, bits_re, bits_im, clip, psis_q)
            combine_quantized(weights, psis, psis_q, nxt)
        else:
            combine_all(weights, psis, nxt)
        for k in range(n_nodes):
            for j in range(dd):
                omegas[k, j] = nxt[k, j]
    return err2, omegas


@jit_kernel
def run_compressed_opt(xs_pad, omega0, phis, noise, d_ext, use_external_d,
                       shared_mode, weights, mu0, eps, eta,
                       max_support, residual_tol, rank_rtol, guard,
                       quant_on, bits_re, bits_im, clip):
    """Compressed-domain diffusion with per-iteration measurement-matrix updates.

    After each combination step every node reconstructs a sparse full-dimension
    estimate from its new compressed estimator via OMP and forms one
    steepest-descent matrix increment from the iteration's compressed regressor
    and filter output.  The step is normalized by the increment's rank-1
    regressor energy ||xbar||^2 ||w_re||^2 (the raw recursion is an LMS update
    for the bilinear model xbar^H phi w_re), which keeps any eta < 2 stable.

    shared_mode True: the whole network maintains the single matrix phis[0];
    the per-node increments are averaged and applied to it once per iteration
    (node-decorrelated reconstruction errors cancel in the average), and
    phis[1:] are mirrored on return.  False: each node updates its own matrix
    locally, matching the per-node notation literally.

    When use_external_d is False the scalar measurement is generated through
    the current (time-varying) matrix; otherwise the precomputed d_ext is
    consumed.  phis is updated in place (pass a copy).  Returns (err2, final
    compressed estimates, diverged flag); diverged is set as soon as any
    matrix entry magnitude exceeds guard or turns non-finite.
    """
    n_nodes = xs_pad.shape[0]
    dd = phis.shape[1]
    m = phis.shape[2]
    n_iter = xs_pad.shape[1] - m + 1
    omegas = np.zeros((n_nodes, dd), dtype=np.complex128)
    psis = np.empty((n_nodes, dd), dtype=np.complex128)
    psis_q = np.empty((n_nodes, dd), dtype=np.complex128)
    nxt = np.empty((n_nodes, dd), dtype=np.complex128)
    xbars = np.empty((n_nodes, dd), dtype=np.complex128)
    ys = np.empty(n_nodes, dtype=np.complex128)
    obar0 = np.empty(dd, dtype=np.complex128)
    incr = np.zeros((dd, m), dtype=np.complex128)
    err2 = np.zeros((n_iter, n_nodes), dtype=np.float64)
    diverged = False
    for i in range(n_iter):
        if shared_mode and not use_external_d:
            for dx in range(dd):
                acc = 0.0 + 0.0j
                for j in range(m):
                    acc += phis[0, dx, j] * omega0[j]
                obar0[dx] = acc
        for k in range(n_nodes):
            src = 0 if shared_mode else k
            for dx in range(dd):
                acc = 0.0 + 0.0j
                for j in range(m):
                    acc += phis[src, dx, j] * xs_pad[k, i + m - 1 - j]
                xbars[k, dx] = acc
            if use_external_d:
                dk = d_ext[k, i]
            else:
                acc2 = 0.0 + 0.0j
                if shared_mode:
                    for dx in range(dd):
                        acc2 += np.conj(obar0[dx]) * xbars[k, dx]
                else:
                    for dx in range(dd):
                        ob = 0.0 + 0.0j
                        for j in range(m):
                            ob += phis[k, dx, j] * omega0[j]
                        acc2 += np.conj(ob) * xbars[k, dx]
                dk = acc2 + noise[k, i]
            e = dk
            nrm = 0.0
            for dx in range(dd):
                e -= np.conj(omegas[k, dx]) * xbars[k, dx]
                re = xbars[k, dx].real
                im = xbars[k, dx].imag
                nrm += re * re + im * im
            mu = mu0 / (nrm + eps)
            ce = np.conj(e)
            for dx in range(dd):
                psis[k, dx] = omegas[k, dx] + mu * ce * xbars[k, dx]
            ys[k] = dk - e
            err2[i, k] = e.real * e.real + e.imag * e.imag
        if quant_on:
            quantize_rows(psis, bits_re, bits_im, clip, psis_q)
            combine_quantized(weights, psis, psis_q, nxt)
        else:
            combine_all(weights, psis, nxt)
        for k in range(n_nodes):
            for dx in range(dd):
                omegas[k, dx] = nxt[k, dx]
        maxabs = 0.0
        if shared_mode:
            for dx in range(dd):
                for j in range(m):
                    incr[dx, j] = 0.0 + 0.0j
            for k in range(n_nodes):
                w_re, _sup, _st = omp_core(phis[0], omegas[k], max_support,
                                           residual_tol, rank_rtol)
                s = 0.0 + 0.0j
                xb_en = 0.0
                for dx in range(dd):
                    acc = 0.0 + 0.0j
                    for j in range(m):
                        acc += phis[0, dx, j] * w_re[j]
                    s += np.conj(xbars[k, dx]) * acc
                    xb_en += (xbars[k, dx].real * xbars[k, dx].real
                              + xbars[k, dx].imag * xbars[k, dx].imag)
                w_en = 0.0
                for j in range(m):
                    w_en += (w_re[j].real * w_re[j].real
                             + w_re[j].imag * w_re[j].imag)
                scale = (eta / (xb_en * w_en + eps)) * (np.conj(ys[k]) - s)
                for dx in range(dd):
                    base = scale * xbars[k, dx]
                    for j in range(m):
                        incr[dx, j] += base * np.conj(w_re[j])
            for dx in range(dd):
                for j in range(m):
                    val = phis[0, dx, j] + incr[dx, j] / n_nodes
                    phis[0, dx, j] = val
                    av = np.abs(val)
                    if av > maxabs:
                        maxabs = av
        else:
            for k in range(n_nodes):
                w_re, _sup, _st = omp_core(phis[k], omegas[k], max_support,
                                           residual_tol, rank_rtol)
                s = 0.0 + 0.0j
                xb_en = 0.0
                for dx in range(dd):
                    acc = 0.0 + 0.0j
                    for j in range(m):
                        acc += phis[k, dx, j] * w_re[j]
                    s += np.conj(xbars[k, dx]) * acc
                    xb_en += (xbars[k, dx].real * xbars[k, dx].real
                              + xbars[k, dx].imag * xbars[k, dx].imag)
                w_en = 0.0
                for j in range(m):
                    w_en += (w_re[j].real * w_re[j].real
                             + w_re[j].imag * w_re[j].imag)
                scale = (eta / (xb_en * w_en + eps)) * (np.conj(ys[k]) - s)
                for dx in range(dd):
                    base = scale * xbars[k, dx]
                    for j in range(m):
                        val = phis[k, dx, j] + base * np.conj(w_re[j])
                        phis[k, dx, j] = val
                        av = np.abs(val)
                        if av > maxabs:
                            maxabs = av
        if not (maxabs <= guard):
            diverged = True
            break
    if shared_mode:
        for k in range(1, n_nodes):
            for dx in range(dd):
                for j in range(m):
                    phis[k, dx, j] = phis[0, dx, j]
    return err2, omegas, diverged
