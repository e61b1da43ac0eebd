"""Quadrature helpers shared by the coherence and lineshape integrals.

Two engines live here:

* :func:`adaptive_simpson` -- vectorised adaptive Simpson rule with
  Richardson extrapolation, for one-dimensional integrands that have narrow
  Lorentzian features sitting on top of a broad Gaussian.
* :func:`composite_gauss_legendre` -- panel Gauss-Legendre rule whose panel
  count is doubled until the estimate stops changing; used for smooth,
  Gaussian-windowed inner integrals that must be evaluated for many outer
  points at once.
"""

import numpy as np

MAX_EVALUATIONS = 2 ** 20
_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


class QuadratureNotConverged(RuntimeError):
    """Raised when a quadrature cannot reach its tolerance within budget."""


def merge_intervals(intervals):
    """Sort and merge overlapping ``(a, b)`` intervals."""
    ivs = sorted((min(a, b), max(a, b)) for a, b in intervals if b != a)
    merged = []
    for a, b in ivs:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def adaptive_simpson(f, a, b, *, rtol=1e-8, breakpoints=(), initial=32,
                     max_evals=MAX_EVALUATIONS):
    """Integrate a (possibly complex) vectorised function over ``[a, b]``.

    ``f`` receives a 1-D float array of abscissae and must return an array of
    the same length.  ``breakpoints`` inside the interval are always used as
    panel edges so narrow features cannot be stepped over.  Each panel is
    accepted once the Simpson/Richardson error estimate falls below its share
    (proportional to width) of ``rtol * |I|``; ``|I|`` is replaced by the
    integral of ``|f|`` when the integral itself cancels to near zero.
    """
    if b <= a:
        return 0.0 + 0.0j
    edges = np.unique(np.concatenate(
        [[a, b], [p for p in breakpoints if a < p < b]]))
    lo = np.concatenate([np.linspace(edges[i], edges[i + 1], initial + 1)[:-1]
                         for i in range(len(edges) - 1)])
    hi = np.concatenate([np.linspace(edges[i], edges[i + 1], initial + 1)[1:]
                         for i in range(len(edges) - 1)])
    mid = 0.5 * (lo + hi)
    f_lo = np.asarray(f(lo), dtype=complex)
    f_mid = np.asarray(f(mid), dtype=complex)
    f_hi = np.asarray(f(hi), dtype=complex)
    n_evals = 3 * lo.size
    length = b - a

    total = 0.0 + 0.0j
    total_abs = 0.0
    while lo.size:
        h = hi - lo
        q1 = 0.5 * (lo + mid)
        q3 = 0.5 * (mid + hi)
        f_q1 = np.asarray(f(q1), dtype=complex)
        f_q3 = np.asarray(f(q3), dtype=complex)
        n_evals += 2 * lo.size
        coarse = h / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
        fine = h / 12.0 * (f_lo + 4.0 * f_q1 + 2.0 * f_mid + 4.0 * f_q3 + f_hi)
        err = np.abs(fine - coarse) / 15.0
        refined = fine + (fine - coarse) / 15.0

        # current best estimate of the whole integral sets the error budget
        est = total + refined.sum()
        est_abs = total_abs + (h / 12.0 * (np.abs(f_lo) + 4 * np.abs(f_q1)
                                           + 2 * np.abs(f_mid) + 4 * np.abs(f_q3)
                                           + np.abs(f_hi))).sum()
        scale = abs(est) if abs(est) > 1e-12 * est_abs else est_abs
        if scale == 0.0:
            return 0.0 + 0.0j
        ok = err <= rtol * scale * h / length
        total += refined[ok].sum()
        total_abs += (h[ok] / 6.0 * (np.abs(f_lo[ok]) + 4 * np.abs(f_mid[ok])
                                     + np.abs(f_hi[ok]))).sum()
        keep = ~ok
        if not keep.any():
            break
        if n_evals + 4 * keep.sum() > max_evals:
            raise QuadratureNotConverged(
                f"adaptive Simpson exceeded {max_evals} evaluations "
                f"(rtol={rtol:g}, {keep.sum()} panels unresolved)")
        lo_k, mid_k, hi_k = lo[keep], mid[keep], hi[keep]
        lo = np.concatenate([lo_k, mid_k])
        hi = np.concatenate([mid_k, hi_k])
        mid = np.concatenate([q1[keep], q3[keep]])
        f_lo, f_hi = (np.concatenate([f_lo[keep], f_mid[keep]]),
                      np.concatenate([f_mid[keep], f_hi[keep]]))
        f_mid = np.concatenate([f_q1[keep], f_q3[keep]])
    return complex(total)


def gl_nodes(a, b, panels):
    """Composite Gauss-Legendre nodes and weights on ``[a, b]``.

    ``a`` and ``b`` may be arrays (one window per outer point); the returned
    arrays then carry an extra trailing axis of length ``panels * 16``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    centre = 0.5 * (edges[1:] + edges[:-1])
    unit_x = (centre[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    unit_w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    width = (b - a)[..., None]
    x = a[..., None] + width * unit_x
    w = width * unit_w
    return x, w


def composite_gauss_legendre(f, a, b, *, rtol=1e-10, panels=4, max_panels=4096):
    """Integrate ``f`` over ``[a, b]`` by doubling the panel count.

    ``a`` and ``b`` broadcast to the batch shape; ``f(x)`` receives nodes with
    a trailing quadrature axis and returns values of the same shape.  The
    result has the batch shape.  Convergence is judged on the whole batch
    against ``rtol`` times the largest magnitude in the batch.
    """
    x, w = gl_nodes(a, b, panels)
    prev = np.sum(f(x) * w, axis=-1)
    while True:
        panels *= 2
        if panels > max_panels:
            raise QuadratureNotConverged(
                f"composite Gauss-Legendre did not converge with {max_panels} panels")
        x, w = gl_nodes(a, b, panels)
        cur = np.sum(f(x) * w, axis=-1)
        scale = np.max(np.abs(cur)) if np.size(cur) else 0.0
        if scale == 0.0 or np.max(np.abs(cur - prev)) <= rtol * scale:
            return cur
        prev = cur
