"""Conjugate-pair bookkeeping for complex point sets.

All fitting engines work on point sets closed under complex conjugation,
ordered so that each conjugate pair sits in adjacent slots (point first,
conjugate second) with purely real points as singletons.  The helpers here
produce that layout, verify it, and build the unitary transform that maps
pair-structured complex realizations to real ones.
"""

import numpy as np

from .errors import RealificationError

_SQRT2 = np.sqrt(2.0)


def conjugate_closure(omega, values):
    """Close frequency samples under conjugation, pairs adjacent.

    Parameters
    ----------
    omega : (n,) array of positive frequencies in rad/s.
    values : (n,) complex samples at ``i*omega``.

    Returns
    -------
    z : (2n,) complex points ``[i*w1, -i*w1, i*w2, -i*w2, ...]``.
    f : (2n,) complex values with ``f[2k+1] = conj(f[2k])``.
    """
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=complex)
    z = np.empty(2 * omega.size, dtype=complex)
    f = np.empty_like(z)
    z[0::2] = 1j * omega
    z[1::2] = -1j * omega
    f[0::2] = values
    f[1::2] = np.conj(values)
    return z, f


def pair_structure(points, rtol=1e-12):
    """Classify a pair-adjacent point list into singletons and pairs.

    Returns a list of ``("real", k)`` and ``("pair", k)`` entries covering
    the list in order (a pair entry covers slots k and k+1).  Raises
    RealificationError when the layout is not pair-adjacent.
    """
    points = np.asarray(points, dtype=complex)
    layout = []
    k = 0
    while k < points.size:
        p = points[k]
        scale = max(1.0, abs(p))
        if abs(p.imag) <= rtol * scale:
            layout.append(("real", k))
            k += 1
            continue
        if k + 1 >= points.size or abs(points[k + 1] - np.conj(p)) > rtol * scale:
            raise RealificationError(
                f"cannot realify: point {p} at slot {k} has no adjacent conjugate"
            )
        layout.append(("pair", k))
        k += 2
    return layout


def realification_matrix(points):
    """Unitary J mapping a pair-structured complex basis to a real one.

    For each adjacent conjugate pair the 2x2 block is
    ``[[1, 1], [-i, i]] / sqrt(2)``; real singletons map to 1.  J is unitary,
    so congruences by it leave transfer functions unchanged.
    """
    points = np.asarray(points, dtype=complex)
    layout = pair_structure(points)
    J = np.zeros((points.size, points.size), dtype=complex)
    for kind, k in layout:
        if kind == "real":
            J[k, k] = 1.0
        else:
            J[k, k] = 1.0 / _SQRT2
            J[k, k + 1] = 1.0 / _SQRT2
            J[k + 1, k] = -1j / _SQRT2
            J[k + 1, k + 1] = 1j / _SQRT2
    return J


def assert_real(arr, what, rtol=1e-9):
    """Drop a negligible imaginary part, raising RealificationError otherwise."""
    arr = np.asarray(arr)
    if not np.iscomplexobj(arr):
        return np.asarray(arr, dtype=float)
    scale = np.max(np.abs(arr)) if arr.size else 0.0
    worst = np.max(np.abs(arr.imag)) if arr.size else 0.0
    if worst > rtol * max(scale, 1e-300):
        raise RealificationError(
            f"cannot realify: {what} has imaginary residue {worst:.3e} "
            f"(scale {scale:.3e})"
        )
    return np.array(arr.real, dtype=float)


def solve_conjugate_ls(segments, rhs, rcond=1e-12):
    """Least squares with exact conjugate symmetry on the solution.

    ``segments`` is a list of ``(columns, layout)`` where ``columns`` is a
    complex matrix whose unknowns follow ``layout`` (from
    :func:`pair_structure` over the matching point list).  Pairs share a
    (re, im) parameter so the solution is conjugate-symmetric by
    construction; real slots contribute one real parameter.  The complex
    rows are stacked as real/imaginary parts and solved by an orthogonal
    factorization with relative cutoff ``rcond``.

    Returns ``(solutions, info)`` with one complex vector per segment and a
    dict carrying the normal-equations certificate ``|A^H r| / (|A| |rhs|)``,
    the residual norm, and a rank-deficiency flag.
    """
    rhs = np.asarray(rhs, dtype=complex)
    real_cols = []
    for columns, layout in segments:
        columns = np.asarray(columns, dtype=complex)
        for kind, k in layout:
            if kind == "real":
                real_cols.append(columns[:, k])
            else:
                real_cols.append(columns[:, k] + columns[:, k + 1])
                real_cols.append(1j * (columns[:, k] - columns[:, k + 1]))
    A_c = np.stack(real_cols, axis=1)
    A = np.vstack([A_c.real, A_c.imag])
    b = np.concatenate([rhs.real, rhs.imag])
    x, _, rank, _ = np.linalg.lstsq(A, b, rcond=rcond)
    solutions = []
    pos = 0
    for columns, layout in segments:
        n = np.asarray(columns).shape[1]
        vec = np.empty(n, dtype=complex)
        for kind, k in layout:
            if kind == "real":
                vec[k] = x[pos]
                pos += 1
            else:
                vec[k] = x[pos] + 1j * x[pos + 1]
                vec[k + 1] = x[pos] - 1j * x[pos + 1]
                pos += 2
        solutions.append(vec)
    full = np.hstack([np.asarray(c, dtype=complex) for c, _ in segments])
    residual = full @ np.concatenate(solutions) - rhs
    cert = np.linalg.norm(full.conj().T @ residual)
    scale = np.linalg.norm(full, 2) * np.linalg.norm(rhs)
    info = {
        "certificate": float(cert / scale) if scale > 0 else 0.0,
        "residual_norm": float(np.linalg.norm(residual)),
        "rank_deficient": rank < A.shape[1],
    }
    return solutions, info


def pair_conjugates(values, rtol=1e-8):
    """Rewrite a conjugation-closed set as exact pairs (pairs first, reals last).

    Eigenvalue routines return conjugate pairs only up to rounding; fitting
    iterations need them exact.  Values are greedily matched to their nearest
    conjugate partner and averaged; near-real values are projected onto the
    real axis.  Raises ValueError when a complex value has no partner.
    """
    values = np.asarray(values, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
    remaining = list(range(values.size))
    reals = []
    pairs = []
    while remaining:
        k = remaining.pop(0)
        v = values[k]
        if abs(v.imag) <= rtol * scale:
            reals.append(v.real)
            continue
        target = np.conj(v)
        best, best_dist = None, np.inf
        for j in remaining:
            d = abs(values[j] - target)
            if d < best_dist:
                best, best_dist = j, d
        if best is None or best_dist > 2 * rtol * scale + 1e-6 * abs(v):
            raise ValueError(f"value {v} has no conjugate partner (closest {best_dist:.3e})")
        remaining.remove(best)
        mean = 0.5 * (v + np.conj(values[best]))
        if mean.imag < 0:
            mean = np.conj(mean)
        pairs.append(mean)
    pairs.sort(key=lambda p: (abs(p), p.real))
    reals.sort()
    out = np.empty(2 * len(pairs) + len(reals), dtype=complex)
    for i, p in enumerate(pairs):
        out[2 * i] = p
        out[2 * i + 1] = np.conj(p)
    out[2 * len(pairs):] = reals
    return out
