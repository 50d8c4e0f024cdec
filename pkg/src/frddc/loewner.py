"""Loewner-framework rational identification from frequency samples.

Pipeline: partition the conjugation-closed samples into left and right
interpolation sets, assemble the Loewner pencil from divided differences,
read the minimal order off the singular values, and project to a real
reduced descriptor realization.  At the detected order on noise-free
rational data the reduced model interpolates every sample.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .data import FrequencyDataset
from .errors import PoleEvaluationError
from .models import DescriptorRealization, realify

#: default relative singular-value threshold for order detection
DEFAULT_RANK_TOL = 1e-10


class FeedthroughWarning(UserWarning):
    """Projected E came out singular: the data may carry a polynomial part."""


@dataclass(frozen=True)
class InterpolationSet:
    """One side of the Loewner data: points and scalar response values.

    SISO throughout, so the tangential directions are all 1 and the left
    values coincide with the plain response values.
    """

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        points = np.atleast_1d(np.asarray(self.points, dtype=complex))
        values = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if points.shape != values.shape or points.ndim != 1:
            raise ValueError("points and values must be 1-D and equal length")
        if np.unique(points).size != points.size:
            raise ValueError("interpolation points must be pairwise distinct")
        points.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.points.size


def partition_data(data: FrequencyDataset):
    """Split samples into left/right sets, closed under conjugation.

    Walking the grid in increasing omega, sample 1 goes left, sample 2 right
    and so on, each together with its conjugate, so both sides cover the
    whole band and stay conjugation-closed with pairs adjacent.
    """
    if data.n < 2:
        raise ValueError("need at least 2 samples to partition")
    sides = ([], [])
    vals = ([], [])
    for k in range(data.n):
        z = 1j * data.omega[k]
        side = k % 2
        sides[side].extend([z, np.conj(z)])
        vals[side].extend([data.values[k], np.conj(data.values[k])])
    left = InterpolationSet(points=np.array(sides[0]), values=np.array(vals[0]))
    right = InterpolationSet(points=np.array(sides[1]), values=np.array(vals[1]))
    return left, right


@dataclass(frozen=True)
class LoewnerPencil:
    """Loewner and shifted-Loewner matrices with their generating data.

    ``L[j, i] = (v_j - w_i)/(mu_j - lambda_i)`` and
    ``Ls[j, i] = (mu_j v_j - lambda_i w_i)/(mu_j - lambda_i)``, so that
    ``Ls - lambda_i L = v_j`` and ``Ls - mu_j L = w_i`` elementwise.
    """

    left: InterpolationSet
    right: InterpolationSet
    L: np.ndarray
    Ls: np.ndarray
    identity_residual: float = field(default=0.0)

    @property
    def shape(self):
        return self.L.shape


def build_pencil(left: InterpolationSet, right: InterpolationSet) -> LoewnerPencil:
    """Assemble the pencil from divided differences of the two data sets."""
    mu = left.points[:, None]
    lam = right.points[None, :]
    collision = mu == lam
    if collision.any():
        j, i = np.argwhere(collision)[0]
        raise ValueError(
            f"left point mu_{j} equals right point lambda_{i} = {left.points[j]}"
        )
    v = left.values[:, None]
    w = right.values[None, :]
    denom = mu - lam
    L = (v - w) / denom
    Ls = (mu * v - lam * w) / denom
    residual = _identity_residual(L, Ls, left, right)
    return LoewnerPencil(left=left, right=right, L=L, Ls=Ls,
                         identity_residual=residual)


def _identity_residual(L, Ls, left, right):
    """Worst relative violation of the two elementwise pencil identities."""
    mu = left.points[:, None]
    lam = right.points[None, :]
    v = left.values[:, None]
    w = right.values[None, :]
    scale = np.abs(lam * L) + np.abs(v) + np.abs(mu * L) + np.abs(w) + 1e-300
    r1 = np.abs(Ls - lam * L - np.broadcast_to(v, L.shape))
    r2 = np.abs(Ls - mu * L - np.broadcast_to(w, L.shape))
    return float(np.max((r1 + r2) / scale))


@dataclass(frozen=True)
class OrderDetection:
    """Rank analysis of the pencil: chosen order plus consistency ranks."""

    order: int
    singular_values: np.ndarray
    tol: float
    rank_row_concat: int
    rank_col_concat: int
    sampled_pencil_ranks: tuple

    def as_rows(self):
        """Rows ``(k, sigma)`` for the singular-value decay CSV."""
        return [(k + 1, float(s)) for k, s in enumerate(self.singular_values)]


def _numerical_rank(matrix, tol):
    sigma = scipy.linalg.svdvals(matrix)
    if sigma.size == 0 or sigma[0] == 0:
        return 0, sigma
    return int(np.count_nonzero(sigma / sigma[0] > tol)), sigma


def detect_order(pencil: LoewnerPencil, tol: float = DEFAULT_RANK_TOL) -> OrderDetection:
    """Minimal order as the numerical rank of the row concatenation [L, Ls].

    Also reports the rank of the column concatenation and of the pencil
    ``z L - Ls`` sampled at a few data points; all agree for consistent
    noise-free data.
    """
    if pencil.L.size == 0:
        raise ValueError("empty pencil")
    row_rank, sigma = _numerical_rank(np.hstack([pencil.L, pencil.Ls]), tol)
    col_rank, _ = _numerical_rank(np.vstack([pencil.L, pencil.Ls]), tol)
    probes = np.concatenate([pencil.left.points[:2], pencil.right.points[:2]])
    sampled = tuple(_numerical_rank(z * pencil.L - pencil.Ls, tol)[0] for z in probes)
    return OrderDetection(order=row_rank, singular_values=sigma, tol=tol,
                          rank_row_concat=row_rank, rank_col_concat=col_rank,
                          sampled_pencil_ranks=sampled)


@dataclass(frozen=True)
class RawLoewnerRealization:
    """Full-size complex descriptor (E, A, B, C) = (-L, -Ls, V, W).

    Interpolates the data wherever the pencil ``z L - Ls`` is invertible;
    for redundant data E is singular and the model only exists after
    projection, so evaluation may fail at any s.
    """

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __call__(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.empty(s_arr.size, dtype=complex)
        for k, sk in enumerate(s_arr):
            pencil = sk * self.E - self.A
            try:
                out[k] = (self.C @ np.linalg.solve(pencil, self.B))[0, 0]
            except np.linalg.LinAlgError:
                raise PoleEvaluationError(sk) from None
        return out[0] if np.ndim(s) == 0 else out.reshape(np.shape(s))


def loewner_realize(pencil: LoewnerPencil) -> RawLoewnerRealization:
    """Raw full-order realization straight from the pencil matrices."""
    return RawLoewnerRealization(E=-pencil.L, A=-pencil.Ls,
                                 B=pencil.left.values[:, None].copy(),
                                 C=pencil.right.values[None, :].copy())


def loewner_reduce(pencil: LoewnerPencil, r: int) -> DescriptorRealization:
    """Project the raw realization to order r and return it in real form.

    The pencil is transformed to a real basis first (the point sets are
    conjugation-closed with pairs adjacent), so the SVD projectors are real
    and the reduced model needs no further cleanup.
    """
    m_l, m_r = pencil.shape
    if not (1 <= r <= min(m_l, m_r)):
        raise ValueError(f"target order {r} outside [1, {min(m_l, m_r)}]")
    raw = loewner_realize(pencil)
    real_raw = realify(raw.E, raw.A, raw.B, raw.C,
                       pencil.left.points, pencil.right.points)
    # projection per the reduced-order construction: Y from the row
    # concatenation, X from the column concatenation
    Y, _, _ = np.linalg.svd(np.hstack([real_raw.E, real_raw.A]) * -1.0,
                            full_matrices=False)
    _, _, Xh = np.linalg.svd(np.vstack([real_raw.E, real_raw.A]) * -1.0,
                             full_matrices=False)
    Y = Y[:, :r]
    X = Xh[:r, :].T
    E_r = Y.T @ real_raw.E @ X
    A_r = Y.T @ real_raw.A @ X
    B_r = Y.T @ real_raw.B
    C_r = real_raw.C @ X
    sigma_e = scipy.linalg.svdvals(E_r)
    if sigma_e[0] == 0 or sigma_e[-1] / sigma_e[0] < 1e-10:
        warnings.warn(
            "projected E is numerically singular; the data may need a "
            "feedthrough or polynomial part the descriptor cannot carry",
            FeedthroughWarning, stacklevel=2)
    return DescriptorRealization(E=E_r, A=A_r, B=B_r, C=C_r)


@dataclass(frozen=True)
class LoewnerFitResult:
    """Reduced model plus the diagnostics the reduction was based on."""

    model: DescriptorRealization
    detection: OrderDetection
    order: int
    residual_max: float
    residual_rms: float


def loewner_fit(data: FrequencyDataset, order: int = None,
                tol: float = DEFAULT_RANK_TOL) -> LoewnerFitResult:
    """End-to-end fit: partition, pencil, order detection, real reduction.

    ``order=None`` takes the detected numerical rank; an explicit order
    overrides it (must be at least 1).
    """
    left, right = partition_data(data)
    pencil = build_pencil(left, right)
    detection = detect_order(pencil, tol=tol)
    r = detection.order if order is None else int(order)
    if r < 1:
        raise ValueError(
            f"cannot reduce to order {r}; data rank detected as {detection.order}")
    model = loewner_reduce(pencil, r)
    rel = _relative_residuals(model, data)
    return LoewnerFitResult(model=model, detection=detection, order=r,
                            residual_max=float(np.max(rel)),
                            residual_rms=float(np.sqrt(np.mean(rel**2))))


def _relative_residuals(model, data: FrequencyDataset) -> np.ndarray:
    fitted = model(1j * data.omega)
    scale = np.maximum(np.abs(data.values), 1e-300)
    return np.abs(fitted - data.values) / scale
