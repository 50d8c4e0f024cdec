"""Vector Fitting: pole relocation by iterated linear least squares.

Each sweep fits numerator and denominator corrections

    N(s) = sum_i c_i/(s - z_i) (+ d0),    D(s) = 1 + sum_i d_i/(s - z_i)

to ``min sum_k |N(z_k) - D(z_k) f_k|^2`` over the current pole set, then
replaces the poles by the zeros of D (an eigenvalue problem on a rank-one
update of the pole diagonal).  The sweep repeats until the poles stop
moving.  The method is non-interpolatory: nothing forces the fit through the
samples, so only residual bounds are meaningful.  A final residue solve with
the denominator frozen at 1 removes the linearization bias.
"""

from dataclasses import dataclass

import numpy as np

from .conjugates import (
    conjugate_closure,
    pair_conjugates,
    pair_structure,
    solve_conjugate_ls,
)
from .data import FrequencyDataset
from .models import PoleResidueModel

#: default convergence tolerance on the pole-movement metric
DEFAULT_POLE_TOL = 1e-8

#: default sweep cap; non-convergence is flagged, not raised
DEFAULT_MAX_ITERS = 100


def vf_init_poles(wmin: float, wmax: float, n: int) -> np.ndarray:
    """Initial poles: lightly damped pairs log-spaced across the band.

    Imaginary parts are log-spaced over [wmin, wmax], real parts are
    -imag/100.  Odd n appends one real pole at the geometric band center.
    Output is conjugation-closed with pairs adjacent.
    """
    if n < 1:
        raise ValueError("order must be at least 1")
    if not (0 < wmin < wmax):
        raise ValueError("need 0 < wmin < wmax")
    n_pairs = n // 2
    poles = np.empty(n, dtype=complex)
    if n_pairs:
        imag = np.logspace(np.log10(wmin), np.log10(wmax), n_pairs)
        poles[0:2 * n_pairs:2] = -imag / 100.0 + 1j * imag
        poles[1:2 * n_pairs:2] = -imag / 100.0 - 1j * imag
    if n % 2:
        poles[-1] = -np.sqrt(wmin * wmax)
    return poles


def vf_iteration(z: np.ndarray, f: np.ndarray, poles: np.ndarray,
                 direct: bool = False):
    """One linearized sweep at fixed poles.

    Returns ``(c, d0, d, info)``: numerator residues, direct term (0.0 when
    disabled), denominator-correction coefficients, and the least-squares
    diagnostics from the conjugate-constrained solve.
    """
    z = np.asarray(z, dtype=complex)
    f = np.asarray(f, dtype=complex)
    poles = np.asarray(poles, dtype=complex)
    clash = np.isin(z, poles)
    if clash.any():
        bad = z[clash][0]
        raise ValueError(f"pole coincides with sample point at omega = {abs(bad.imag)}")
    cauchy = 1.0 / (z[:, None] - poles[None, :])
    layout = pair_structure(poles)
    segments = [(cauchy, layout)]
    if direct:
        segments.append((np.ones((z.size, 1), dtype=complex), [("real", 0)]))
    segments.append((-f[:, None] * cauchy, layout))
    solutions, info = solve_conjugate_ls(segments, f)
    c = solutions[0]
    d0 = float(solutions[1][0].real) if direct else 0.0
    d = solutions[-1]
    return c, d0, d, info


def relocate_poles(poles: np.ndarray, d: np.ndarray,
                   flip_unstable: bool = False) -> np.ndarray:
    """Zeros of the denominator ``1 + sum d_i/(s - pole_i)``.

    These are the eigenvalues of ``diag(poles) - ones @ d^T``.  The output
    is re-paired into exact conjugates; with ``flip_unstable`` any pole with
    positive real part is reflected across the imaginary axis.
    """
    poles = np.asarray(poles, dtype=complex)
    d = np.asarray(d, dtype=complex)
    if poles.shape != d.shape:
        raise ValueError("coefficient/pole counts differ")
    A = np.diag(poles) - np.outer(np.ones(poles.size), d)
    new_poles = np.linalg.eigvals(A)
    new_poles = pair_conjugates(new_poles)
    if flip_unstable:
        new_poles = np.where(new_poles.real > 0,
                             -new_poles.real + 1j * new_poles.imag, new_poles)
    return new_poles


def pole_movement(old: np.ndarray, new: np.ndarray) -> float:
    """Greedy nearest-neighbor matching distance between two pole sets."""
    old = np.asarray(old, dtype=complex)
    new = list(np.asarray(new, dtype=complex))
    worst = 0.0
    for p in old:
        dists = [abs(p - q) for q in new]
        j = int(np.argmin(dists))
        worst = max(worst, dists[j])
        new.pop(j)
    return worst


@dataclass(frozen=True)
class VfFitResult:
    """Pole-residue fit with convergence diagnostics."""

    model: PoleResidueModel
    converged: bool
    n_iters: int
    history: tuple
    residual_max: float
    residual_rms: float
    certificate_max: float

    def history_rows(self):
        """Rows ``(iter, pole_movement, ls_residual)`` for the diagnostics CSV."""
        return list(self.history)


def vf_fit(data: FrequencyDataset, order: int, max_iters: int = DEFAULT_MAX_ITERS,
           pole_tol: float = DEFAULT_POLE_TOL, direct: bool = False,
           flip_unstable: bool = False, init_poles=None) -> VfFitResult:
    """Fit a fixed-order pole-residue model to frequency samples.

    Iterates until the pole set moves less than ``pole_tol`` (matched by
    nearest neighbors) or ``max_iters`` sweeps elapse; non-convergence is
    reported in the result, not raised.  After the pole loop the residues
    are recomputed with the denominator frozen at 1.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if data.n == 0:
        raise ValueError("cannot fit an empty dataset")
    z, f = conjugate_closure(data.omega, data.values)
    if init_poles is not None:
        poles = np.asarray(init_poles, dtype=complex)
        if poles.size != order:
            raise ValueError("init_poles length must equal the order")
    else:
        poles = vf_init_poles(data.omega[0], data.omega[-1], order)
    history = []
    cert_max = 0.0
    converged = False
    n_iters = 0
    for it in range(1, max_iters + 1):
        n_iters = it
        c, d0, d, info = vf_iteration(z, f, poles, direct=direct)
        cert_max = max(cert_max, info["certificate"])
        new_poles = relocate_poles(poles, d, flip_unstable=flip_unstable)
        movement = pole_movement(poles, new_poles)
        scale = np.linalg.norm(f)
        history.append((it, movement, info["residual_norm"] / max(scale, 1e-300)))
        poles = new_poles
        if movement < pole_tol:
            converged = True
            break
    # final residues with the denominator frozen at 1
    cauchy = 1.0 / (z[:, None] - poles[None, :])
    layout = pair_structure(poles)
    segments = [(cauchy, layout)]
    if direct:
        segments.append((np.ones((z.size, 1), dtype=complex), [("real", 0)]))
    solutions, info = solve_conjugate_ls(segments, f)
    cert_max = max(cert_max, info["certificate"])
    residues = solutions[0]
    d0 = float(solutions[1][0].real) if direct else 0.0
    model = PoleResidueModel(poles=poles, residues=residues, direct=d0)
    rel = np.abs(model(1j * data.omega) - data.values)
    rel /= np.maximum(np.abs(data.values), 1e-300)
    return VfFitResult(model=model, converged=converged, n_iters=n_iters,
                       history=tuple(history), residual_max=float(np.max(rel)),
                       residual_rms=float(np.sqrt(np.mean(rel**2))),
                       certificate_max=cert_max)
