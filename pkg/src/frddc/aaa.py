"""Greedy barycentric rational fitting, modified for real strictly proper models.

The fit starts from the mean of the samples, then repeatedly promotes the
worst-fit point (together with its complex conjugate, so models stay real)
from the active set to the support set and re-solves a linearized least
squares problem for the barycentric weights.  The approximant with ``ell``
support points has numerator degree ``ell - 1``: strictly proper by
construction, unlike the classic barycentric scheme of type (ell, ell).

The weight solve minimizes ``|| L a + f ||`` over the active rows, where
``L[k, j] = (f_k - h_j)/(z_k - nu_j)``; support rows are excluded since they
are 0/0 there.  Weights are parameterized by their real and imaginary parts
with conjugate pairs sharing parameters, so conjugate symmetry is exact, not
approximate.
"""

from dataclasses import dataclass, field

import numpy as np

from .conjugates import conjugate_closure, pair_structure, solve_conjugate_ls
from .data import FrequencyDataset
from .models import BarycentricModel, DescriptorRealization, realify

#: singular value cutoff (relative) for the least-squares solve
LS_RCOND = 1e-12


@dataclass
class AaaState:
    """Mutable fitting state: sample partition, weights, and error history."""

    z: np.ndarray
    f: np.ndarray
    support: list
    weights: np.ndarray
    constant: complex
    tol: float
    max_order: int
    history: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    rank_deficient: bool = False

    @property
    def ell(self) -> int:
        return len(self.support)

    @property
    def active(self) -> np.ndarray:
        mask = np.ones(self.z.size, dtype=bool)
        mask[self.support] = False
        return np.nonzero(mask)[0]

    def model(self) -> BarycentricModel:
        if not self.support:
            return BarycentricModel(nodes=np.empty(0, dtype=complex),
                                    values=np.empty(0, dtype=complex),
                                    weights=np.empty(0, dtype=complex),
                                    constant=self.constant)
        idx = np.asarray(self.support)
        return BarycentricModel(nodes=self.z[idx], values=self.f[idx],
                                weights=self.weights, constant=self.constant)


def aaa_init(data: FrequencyDataset, tol: float, max_order: int) -> AaaState:
    """Constant initial approximant: the mean of the conjugation-closed samples."""
    if data.n == 0:
        raise ValueError("cannot fit an empty dataset")
    z, f = conjugate_closure(data.omega, data.values)
    constant = complex(np.mean(f))
    return AaaState(z=z, f=f, support=[], weights=np.empty(0, dtype=complex),
                    constant=constant, tol=tol, max_order=max_order)


def greedy_select(state: AaaState) -> int:
    """Promote the worst active point (and its conjugate) to the support set.

    Returns the promoted index.  Ties take the lowest index.  The positive
    imaginary-part member of the pair goes first, so support layouts are
    deterministic and pair-adjacent.
    """
    active = state.active
    if active.size == 0:
        raise ValueError("data exhausted: no active points left to select")
    approx = state.model()
    errors = np.abs(state.f[active] - approx(state.z[active]))
    k = int(active[np.argmax(errors)])
    z_k = state.z[k]
    if z_k.imag == 0:
        state.support.append(k)
        return k
    partner = np.nonzero(state.z == np.conj(z_k))[0]
    if partner.size == 0:
        raise ValueError(f"point {z_k} has no conjugate partner in the data")
    j = int(partner[0])
    first, second = (k, j) if z_k.imag > 0 else (j, k)
    if first in state.support or second in state.support:
        raise ValueError(f"conjugate partner of {z_k} is already a support point")
    state.support.extend([first, second])
    return k


def solve_weights(state: AaaState) -> np.ndarray:
    """Linearized least squares for the weights over the active rows.

    The pseudo-inverse solve is an orthogonal-factorization least squares
    with relative cutoff 1e-12; rank deficiency yields the minimum-norm
    solution and sets a diagnostic flag.  Appends the relative
    normal-equations residual to the certificate list.
    """
    idx = np.asarray(state.support)
    nu = state.z[idx]
    h = state.f[idx]
    active = state.active
    zk = state.z[active]
    fk = state.f[active]
    L = (fk[:, None] - h[None, :]) / (zk[:, None] - nu[None, :])
    (weights,), info = solve_conjugate_ls([(L, pair_structure(nu))], -fk,
                                          rcond=LS_RCOND)
    if info["rank_deficient"]:
        state.rank_deficient = True
    state.certificates.append(info["certificate"])
    state.weights = weights
    return weights


@dataclass(frozen=True)
class AaaFitResult:
    """Fitted barycentric model with per-iteration diagnostics."""

    model: BarycentricModel
    exit_reason: str
    final_max_error: float
    history: tuple
    certificate_max: float
    rank_deficient: bool

    @property
    def order(self) -> int:
        return self.model.order

    def history_rows(self):
        """Rows ``(ell, max_error, selected_omega)`` for the diagnostics CSV."""
        return list(self.history)


def aaa_fit(data: FrequencyDataset, tol: float = None,
            max_order: int = None) -> AaaFitResult:
    """Greedy fit until the worst error drops below tol or the order cap hits.

    tol is an absolute error bound on the samples; None picks
    ``1e-10 * max|f|``.  max_order caps the support size; None allows
    ``data.n - 1`` (a complex-pair step may overshoot an odd cap by one).
    """
    if max_order is None:
        max_order = max(data.n - 1, 1)
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    scale = float(np.max(np.abs(data.values))) if data.n else 0.0
    if tol is None:
        tol = 1e-10 * max(scale, 1e-300)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    state = aaa_init(data, tol, max_order)

    def worst_error():
        approx = state.model()
        return float(np.max(np.abs(state.f - approx(state.z))))

    max_err = worst_error()
    exit_reason = "tolerance"
    while max_err > state.tol:
        if state.ell >= state.max_order:
            exit_reason = "order_cap"
            break
        if state.active.size == 0:
            exit_reason = "data_exhausted"
            break
        selected = greedy_select(state)
        solve_weights(state)
        max_err = worst_error()
        state.history.append((state.ell, max_err, abs(state.z[selected].imag)))
    return AaaFitResult(model=state.model(), exit_reason=exit_reason,
                        final_max_error=max_err, history=tuple(state.history),
                        certificate_max=float(max(state.certificates, default=0.0)),
                        rank_deficient=state.rank_deficient)


def barycentric_to_realization(model: BarycentricModel) -> DescriptorRealization:
    """Real state-space form of the barycentric model.

    The complex realization is ``(I, diag(nodes) - weights @ ones^T, weights,
    values)``: a rank-one downdate of the node diagonal.  The order-0 model
    becomes a pure feedthrough.
    """
    n = model.order
    if n == 0:
        d = np.atleast_2d(model.constant.real)
        return DescriptorRealization(E=np.eye(1), A=-np.eye(1),
                                     B=np.zeros((1, 1)), C=np.zeros((1, 1)), D=d)
    E = np.eye(n, dtype=complex)
    A = np.diag(model.nodes) - np.outer(model.weights, np.ones(n))
    B = model.weights[:, None].copy()
    C = model.values[None, :].copy()
    return realify(E, A, B, C, model.nodes, model.nodes)
