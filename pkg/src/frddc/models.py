"""Rational LTI model forms and conversions between them.

Four interchangeable representations are provided:

* :class:`DescriptorRealization` -- real matrices (E, A, B, C, D) with
  transfer function ``C (sE - A)^-1 B + D``; possibly singular E.
* :class:`BarycentricModel` -- strictly proper barycentric rational form
  anchored at support points (numerator degree one below denominator).
* :class:`PoleResidueModel` -- partial-fraction form with an optional real
  direct term.
* :class:`RationalPolyForm` -- plain real numerator/denominator coefficients
  with monic denominator, for reporting.

All classes are immutable after construction and evaluate vectorized over
complex arguments.  Models built from conjugation-closed data are
real-coefficient symmetric: ``H(conj(s)) == conj(H(s))``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .conjugates import assert_real, pair_structure, realification_matrix
from .errors import (
    CoefficientFormError,
    DegeneratePencilError,
    PoleEvaluationError,
    RealificationError,
)

#: eigenvalues with modulus above this are treated as the pencil's
#: infinite (polynomial-part) eigenvalues and excluded from pole sets
INFINITE_EIGENVALUE_THRESHOLD = 1e12

#: coefficient conversion is refused above this order (ill-conditioned)
MAX_POLY_ORDER = 30


def _frozen_array(values, dtype):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _as_matrix(values, name):
    arr = np.atleast_2d(np.asarray(values))
    if np.iscomplexobj(arr):
        raise RealificationError(f"{name} must be real; realify complex data first")
    return _frozen_array(arr, float)


@dataclass(frozen=True)
class DescriptorRealization:
    """Real descriptor state-space model ``E x' = A x + B u, y = C x + D u``.

    E and A are square of equal dimension n; B is n-by-n_u, C is n_y-by-n,
    D is n_y-by-n_u.  E may be singular (descriptor form), in which case the
    pencil has infinite eigenvalues that are excluded from :func:`poles_of`.
    """

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = None

    def __post_init__(self):
        E = _as_matrix(self.E, "E")
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        C = _as_matrix(self.C, "C")
        n = E.shape[0]
        if E.shape != (n, n) or A.shape != (n, n):
            raise ValueError(f"E and A must be square and equal-sized, got {E.shape}, {A.shape}")
        if B.shape[0] != n:
            raise ValueError(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise ValueError(f"C has {C.shape[1]} columns, expected {n}")
        D = self.D
        if D is None:
            D = np.zeros((C.shape[0], B.shape[1]))
        D = _as_matrix(D, "D")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError(f"D must be {C.shape[0]}x{B.shape[1]}, got {D.shape}")
        for name, arr in (("E", E), ("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, arr)

    @property
    def order(self) -> int:
        return self.E.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]

    @property
    def is_siso(self) -> bool:
        return self.n_u == 1 and self.n_y == 1

    def transfer(self, s: complex) -> np.ndarray:
        """Transfer matrix ``C (sE - A)^-1 B + D`` at a single point."""
        pencil = s * self.E - self.A
        try:
            x = np.linalg.solve(pencil, self.B)
        except np.linalg.LinAlgError:
            raise PoleEvaluationError(s) from None
        return self.C @ x + self.D

    def __call__(self, s):
        """SISO scalar response; accepts scalars or arrays of complex s."""
        if not self.is_siso:
            raise ValueError("scalar evaluation requires a SISO model")
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        pencils = s_arr[:, None, None] * self.E - self.A
        rhs = np.broadcast_to(self.B, (s_arr.size,) + self.B.shape)
        try:
            x = np.linalg.solve(pencils, rhs)
        except np.linalg.LinAlgError:
            # locate the offending point to report it
            for sk in s_arr:
                try:
                    np.linalg.solve(sk * self.E - self.A, self.B)
                except np.linalg.LinAlgError:
                    raise PoleEvaluationError(sk) from None
            raise
        out = (self.C @ x)[:, 0, 0] + self.D[0, 0]
        return out[0] if np.isscalar(s) or np.ndim(s) == 0 else out.reshape(np.shape(s))


@dataclass(frozen=True)
class BarycentricModel:
    """Strictly proper barycentric rational form.

    ``H(s) = sum_j w_j h_j / (s - nu_j)  /  (1 + sum_j w_j / (s - nu_j))``

    with pairwise distinct support points ``nu_j``, support values ``h_j``
    and nonzero weights ``w_j``.  Interpolation ``H(nu_j) = h_j`` holds by
    construction.  The degenerate zero-support model evaluates to
    ``constant`` (the greedy fit's initial mean approximant).
    """

    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    constant: complex = 0.0

    def __post_init__(self):
        nodes = _frozen_array(np.atleast_1d(self.nodes), complex)
        values = _frozen_array(np.atleast_1d(self.values), complex)
        weights = _frozen_array(np.atleast_1d(self.weights), complex)
        if not (nodes.shape == values.shape == weights.shape) or nodes.ndim != 1:
            raise ValueError("nodes, values and weights must be equal-length 1-D sequences")
        if nodes.size != np.unique(nodes).size:
            raise ValueError("support points must be pairwise distinct")
        if np.any(weights == 0):
            raise ValueError("barycentric weights must be nonzero")
        _check_conjugation_closure(nodes, values, "support values")
        _check_conjugation_closure(nodes, weights, "weights")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "constant", complex(self.constant))

    @property
    def order(self) -> int:
        return self.nodes.size

    def __call__(self, s):
        if self.order == 0:
            out = np.full(np.shape(s), self.constant, dtype=complex)
            return complex(self.constant) if out.ndim == 0 else out
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        diff = s_arr[:, None] - self.nodes[None, :]
        out = np.empty(s_arr.size, dtype=complex)
        at_node = diff == 0
        hit = at_node.any(axis=1)
        if hit.any():
            idx = at_node[hit].argmax(axis=1)
            out[hit] = self.values[idx]
        ok = ~hit
        if ok.any():
            cauchy = 1.0 / diff[ok]
            num = cauchy @ (self.weights * self.values)
            den = 1.0 + cauchy @ self.weights
            out[ok] = num / den
        return out[0] if np.ndim(s) == 0 else out.reshape(np.shape(s))


@dataclass(frozen=True)
class PoleResidueModel:
    """Partial-fraction form ``H(s) = sum_k r_k / (s - p_k) + d``.

    Poles are pairwise distinct and conjugation-closed with conjugate
    residues; the optional direct term d is real.
    """

    poles: np.ndarray
    residues: np.ndarray
    direct: float = 0.0

    def __post_init__(self):
        poles = _frozen_array(np.atleast_1d(self.poles), complex)
        residues = _frozen_array(np.atleast_1d(self.residues), complex)
        if poles.shape != residues.shape or poles.ndim != 1:
            raise ValueError("poles and residues must be equal-length 1-D sequences")
        if poles.size != np.unique(poles).size:
            raise ValueError("poles must be pairwise distinct")
        _check_conjugation_closure(poles, residues, "residues")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", residues)
        object.__setattr__(self, "direct", float(self.direct))

    @property
    def order(self) -> int:
        return self.poles.size

    def __call__(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        diff = s_arr[:, None] - self.poles[None, :] if self.order else None
        if diff is not None:
            hits = np.nonzero((diff == 0).any(axis=1))[0]
            if hits.size:
                raise PoleEvaluationError(complex(s_arr[hits[0]]))
            out = (1.0 / diff) @ self.residues + self.direct
        else:
            out = np.full(s_arr.size, self.direct, dtype=complex)
        return out[0] if np.ndim(s) == 0 else out.reshape(np.shape(s))

    def to_realization(self) -> DescriptorRealization:
        """Real state-space form (I, diag(poles), ones, residues, d) realified."""
        n = self.order
        if n == 0:
            d = np.atleast_2d(self.direct)
            return DescriptorRealization(E=np.eye(1), A=-np.eye(1),
                                         B=np.zeros((1, 1)), C=np.zeros((1, 1)), D=d)
        E = np.eye(n, dtype=complex)
        A = np.diag(self.poles)
        B = np.ones((n, 1), dtype=complex)
        C = self.residues[None, :].astype(complex)
        D = np.atleast_2d(self.direct)
        return realify(E, A, B, C, self.poles, self.poles, D=D)


@dataclass(frozen=True)
class RationalPolyForm:
    """Real polynomial fraction with monic denominator, descending powers."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = np.atleast_1d(np.asarray(self.num, dtype=float))
        den = np.atleast_1d(np.asarray(self.den, dtype=float))
        den = np.trim_zeros(den, "f")
        if den.size == 0:
            raise ValueError("denominator is identically zero")
        num = num / den[0]
        den = den / den[0]
        trimmed = np.trim_zeros(num, "f")
        num = trimmed if trimmed.size else np.zeros(1)
        object.__setattr__(self, "num", _frozen_array(num, float))
        object.__setattr__(self, "den", _frozen_array(den, float))

    @property
    def num_degree(self) -> int:
        return self.num.size - 1

    @property
    def den_degree(self) -> int:
        return self.den.size - 1

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=complex)
        den_v = np.polyval(self.den, s_arr)
        zero = np.atleast_1d(den_v) == 0
        if zero.any():
            bad = np.atleast_1d(s_arr)[zero][0]
            raise PoleEvaluationError(complex(bad))
        return np.polyval(self.num, s_arr) / den_v

    def poles(self) -> np.ndarray:
        return np.roots(self.den)

    def zeros(self) -> np.ndarray:
        return np.roots(self.num)

    def __str__(self):
        return f"({format_poly(self.num)}) / ({format_poly(self.den)})"


def format_poly(coeffs, var="s") -> str:
    """Render descending-power coefficients like ``s^2 + 2 s + 1``."""
    coeffs = np.atleast_1d(coeffs)
    deg = coeffs.size - 1
    terms = []
    for k, c in enumerate(coeffs):
        p = deg - k
        if c == 0 and coeffs.size > 1:
            continue
        mag = f"{abs(c):.6g}"
        if p > 0 and abs(c) == 1:
            mag = ""
        body = mag if p == 0 else (f"{mag} {var}".strip() if p == 1 else f"{mag} {var}^{p}".strip())
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first_body = terms[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def _check_conjugation_closure(points, companions, what, rtol=1e-9):
    """Require conj(point) present with conjugate companion value."""
    points = np.asarray(points)
    scale = max(1.0, float(np.max(np.abs(companions))) if companions.size else 1.0)
    for k, p in enumerate(points):
        if p.imag == 0:
            continue
        match = np.nonzero(points == np.conj(p))[0]
        if match.size != 1:
            raise ValueError(f"point {p} lacks a unique conjugate partner")
        j = match[0]
        if abs(companions[j] - np.conj(companions[k])) > rtol * scale:
            raise ValueError(f"{what} not conjugation-closed at point {p}")


# ---------------------------------------------------------------------------
# spectra


def descriptor_eigenvalues(model: DescriptorRealization):
    """Generalized eigenvalues of (A, E) split into finite and infinite ones.

    Returns ``(finite, n_infinite)`` where eigenvalues of modulus above
    ``INFINITE_EIGENVALUE_THRESHOLD`` (or returned non-finite by LAPACK)
    count as infinite.  Raises DegeneratePencilError for pencils singular at
    every s (e.g. E identically zero, or indefinite 0/0 eigenvalues).
    """
    if not np.any(model.E):
        raise DegeneratePencilError("degenerate pencil: E is identically zero")
    alpha, beta = scipy.linalg.eig(model.A, model.E, right=False, homogeneous_eigvals=True)
    both_zero = (np.abs(alpha) < 1e-300) & (np.abs(beta) < 1e-300)
    if np.any(both_zero):
        raise DegeneratePencilError("degenerate pencil: singular for every s")
    with np.errstate(divide="ignore", invalid="ignore"):
        eig = alpha / beta
    infinite = ~np.isfinite(eig) | (np.abs(eig) > INFINITE_EIGENVALUE_THRESHOLD)
    finite = eig[~infinite]
    order = np.lexsort((finite.imag, finite.real))
    return finite[order], int(np.count_nonzero(infinite))


def poles_of(model) -> np.ndarray:
    """Finite poles of any supported model form, sorted by (real, imag)."""
    if isinstance(model, DescriptorRealization):
        return descriptor_eigenvalues(model)[0]
    if isinstance(model, PoleResidueModel):
        p = np.array(model.poles)
        return p[np.lexsort((p.imag, p.real))]
    if isinstance(model, BarycentricModel):
        p = barycentric_poles(model)
        return p[np.lexsort((p.imag, p.real))]
    if isinstance(model, RationalPolyForm):
        p = model.poles()
        return p[np.lexsort((p.imag, p.real))]
    raise TypeError(f"unsupported model type {type(model).__name__}")


def barycentric_poles(model: BarycentricModel) -> np.ndarray:
    """Denominator zeros of the barycentric form.

    The denominator ``1 + sum w_j/(s - nu_j)`` vanishes exactly at the
    eigenvalues of the rank-one update ``diag(nodes) - weights @ ones^T``,
    the same matrix the state-space conversion uses.
    """
    if model.order == 0:
        return np.array([], dtype=complex)
    A = np.diag(model.nodes) - np.outer(model.weights, np.ones(model.order))
    return np.linalg.eigvals(A)


# ---------------------------------------------------------------------------
# realification


def realify(E, A, B, C, row_points, col_points, D=None) -> DescriptorRealization:
    """Transform a conjugation-closed complex realization to real matrices.

    ``row_points``/``col_points`` give the interpolation points indexing the
    rows/columns of the state space (identical for diagonal realizations);
    each list must hold conjugate pairs in adjacent slots.  The congruence by
    the unitary pair transform ``[[1, 1], [-i, i]]/sqrt(2)`` leaves the
    transfer function unchanged; the result is real up to rounding, which is
    verified and stripped.
    """
    E = np.asarray(E, dtype=complex)
    A = np.asarray(A, dtype=complex)
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    J_row = realification_matrix(row_points)
    J_col = realification_matrix(col_points)
    E_r = assert_real(J_row @ E @ J_col.conj().T, "E")
    A_r = assert_real(J_row @ A @ J_col.conj().T, "A")
    B_r = assert_real(J_row @ B, "B")
    C_r = assert_real(C @ J_col.conj().T, "C")
    D_r = None if D is None else assert_real(np.atleast_2d(D), "D")
    return DescriptorRealization(E=E_r, A=A_r, B=B_r, C=C_r, D=D_r)


# ---------------------------------------------------------------------------
# coefficient form


def to_poly_form(model, max_order: int = MAX_POLY_ORDER) -> RationalPolyForm:
    """Convert any model form to real monic-denominator coefficients.

    Refuses models above ``max_order`` (coefficient form is ill-conditioned
    there).  The conversion is verified against the source model at 20
    pseudo-random points to relative 1e-6 and raises CoefficientFormError on
    disagreement.
    """
    if isinstance(model, RationalPolyForm):
        return model
    order = model.order
    if order > max_order:
        raise CoefficientFormError(
            f"coefficient form refused: order {order} exceeds {max_order}"
        )
    if isinstance(model, PoleResidueModel):
        form = _pole_residue_to_poly(model)
    elif isinstance(model, BarycentricModel):
        form = _barycentric_to_poly(model)
    elif isinstance(model, DescriptorRealization):
        form = _descriptor_to_poly(model)
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    _verify_poly_form(model, form)
    return form


def _pole_residue_to_poly(model: PoleResidueModel) -> RationalPolyForm:
    den = np.poly(model.poles) if model.order else np.ones(1)
    num = np.zeros(max(model.order, 1), dtype=complex)
    for k in range(model.order):
        others = np.delete(model.poles, k)
        num = np.polyadd(num, model.residues[k] * np.poly(others))
    if model.direct:
        num = np.polyadd(num, model.direct * den)
    return RationalPolyForm(num=assert_real(num, "numerator"),
                            den=assert_real(den, "denominator"))


def _barycentric_to_poly(model: BarycentricModel) -> RationalPolyForm:
    if model.order == 0:
        c = assert_real(np.array([model.constant]), "constant")
        return RationalPolyForm(num=c, den=[1.0])
    den = np.poly(model.nodes)
    num = np.zeros(1, dtype=complex)
    for j in range(model.order):
        others = np.delete(model.nodes, j)
        cofactor = model.weights[j] * np.poly(others)
        den = np.polyadd(den, cofactor)
        num = np.polyadd(num, model.values[j] * cofactor)
    return RationalPolyForm(num=assert_real(num, "numerator"),
                            den=assert_real(den, "denominator"))


def _descriptor_to_poly(model: DescriptorRealization) -> RationalPolyForm:
    if not model.is_siso:
        raise CoefficientFormError("coefficient form supports SISO models only")
    finite, n_inf = descriptor_eigenvalues(model)
    if n_inf and np.any(model.E):
        # infinite eigenvalues mean a polynomial part beyond the D term
        raise CoefficientFormError(
            "coefficient form refused: pencil has a polynomial part"
        )
    den = assert_real(np.poly(finite) if finite.size else np.ones(1), "denominator")
    deg_num = finite.size if np.any(model.D) else finite.size - 1
    deg_num = max(deg_num, 0)
    radius = 2.0 * max(1.0, float(np.max(np.abs(finite))) if finite.size else 1.0)
    m = 2 * (deg_num + 1)
    s_fit = radius * np.exp(2j * np.pi * (np.arange(m) + 0.25) / m)
    h = model(s_fit)
    q = h * np.polyval(den, s_fit)
    powers = np.arange(deg_num, -1, -1)
    vand = (s_fit[:, None] / radius) ** powers[None, :]
    coef_scaled, *_ = np.linalg.lstsq(vand, q, rcond=None)
    num = assert_real(coef_scaled / radius**powers, "numerator", rtol=1e-6)
    return RationalPolyForm(num=num, den=den)


def _verify_poly_form(model, form, n_points=20, rtol=1e-6):
    rng = np.random.default_rng(1729)
    poles = form.poles()
    scale = max(1.0, float(np.max(np.abs(poles))) if poles.size else 1.0)
    checked = 0
    while checked < n_points:
        s = scale * (rng.uniform(-3, 3) + 1j * rng.uniform(-3, 3))
        if poles.size and np.min(np.abs(s - poles)) < 1e-3 * scale:
            continue
        try:
            ref = model(s)
        except PoleEvaluationError:
            continue
        got = form(s)
        if abs(got - ref) > rtol * max(abs(ref), 1e-12):
            raise CoefficientFormError(
                f"coefficient conversion failed verification at s = {s}: "
                f"{got} vs {ref}"
            )
        checked += 1


def poly_to_pole_residue(form: RationalPolyForm) -> PoleResidueModel:
    """Partial-fraction expansion of a coefficient form (distinct poles only)."""
    import scipy.signal

    r, p, k = scipy.signal.residue(form.num, form.den)
    if p.size != np.unique(np.round(p, 12)).size:
        raise CoefficientFormError("partial fractions require pairwise distinct poles")
    if k.size > 1 or (k.size == 1 and form.num_degree > form.den_degree):
        raise CoefficientFormError("improper fraction has a polynomial part")
    direct = float(k[0].real) if k.size else 0.0
    # adjacency layout: conjugate pairs side by side for later realification
    from .conjugates import pair_conjugates

    paired = pair_conjugates(p)
    residues = np.empty_like(paired)
    used = np.zeros(p.size, dtype=bool)
    for i, pole in enumerate(paired):
        j = int(np.argmin(np.where(used, np.inf, np.abs(p - pole))))
        used[j] = True
        residues[i] = r[j]
    # enforce exact conjugate residues over the paired layout
    struct = pair_structure(paired, rtol=1e-8)
    for kind, k0 in struct:
        if kind == "pair":
            mean = 0.5 * (residues[k0] + np.conj(residues[k0 + 1]))
            residues[k0] = mean
            residues[k0 + 1] = np.conj(mean)
        else:
            residues[k0] = residues[k0].real
    return PoleResidueModel(poles=paired, residues=residues, direct=direct)
