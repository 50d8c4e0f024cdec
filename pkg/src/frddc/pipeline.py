"""Model-reference controller design from frequency-response data.

Given plant samples and a reference family, the ideal-controller values

    K*_i = M_j(i w_i) / (Phi_i (1 - M_j(i w_i)))

are what a controller would have to look like on the grid for the closed
loop to equal the reference there; fitting a rational model to them is a
pure identification problem handled by one of the three engines.  With a
single-member family every sample uses the same reference; with several
members the samples are assigned round-robin and one controller is fitted
to the pooled values.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .aaa import aaa_fit
from .data import FrequencyDataset
from .errors import LoopSingularError, PlantZeroError, ReferenceSaturationError
from .loewner import build_pencil, detect_order, loewner_fit, partition_data
from .models import poles_of, to_poly_form
from .reference import ReferenceFamily
from .responses import bode_grid, grid_for_band, step_response
from .vecfit import vf_fit

#: |1 - M| below this counts as reference saturation at the sample
SATURATION_TOL = 1e-12

METHODS = ("loewner", "aaa", "vf")


@dataclass(frozen=True)
class IdealControllerData:
    """Ideal-controller samples with their reference-member assignment."""

    samples: FrequencyDataset
    member_index: np.ndarray
    family: ReferenceFamily

    def __post_init__(self):
        member = np.asarray(self.member_index, dtype=int)
        if member.shape != (self.samples.n,):
            raise ValueError("member_index length must equal the sample count")
        if member.size and not (0 <= member.min() and member.max() < self.family.n_s):
            raise ValueError("member_index out of range for the family")
        member.setflags(write=False)
        object.__setattr__(self, "member_index", member)

    @property
    def n(self) -> int:
        return self.samples.n

    def reference_values(self) -> np.ndarray:
        """M_j(i w_i) for the member j paired with each sample."""
        out = np.empty(self.n, dtype=complex)
        for j, ref in enumerate(self.family.members):
            sel = self.member_index == j
            if sel.any():
                out[sel] = ref(1j * self.samples.omega[sel])
        return out


def ideal_controller_samples(plant_data: FrequencyDataset,
                             family: ReferenceFamily) -> IdealControllerData:
    """Invert the closed-loop target into controller samples on the grid."""
    if plant_data.n == 0:
        raise ValueError("plant dataset is empty")
    member = family.assign(plant_data.n)
    m_vals = np.empty(plant_data.n, dtype=complex)
    for j, ref in enumerate(family.members):
        sel = member == j
        if sel.any():
            m_vals[sel] = ref(1j * plant_data.omega[sel])
    phi = plant_data.values
    zero = np.nonzero(phi == 0)[0]
    if zero.size:
        raise PlantZeroError(plant_data.omega[zero[0]])
    saturated = np.nonzero(np.abs(1.0 - m_vals) < SATURATION_TOL)[0]
    if saturated.size:
        raise ReferenceSaturationError(plant_data.omega[saturated[0]])
    kstar = m_vals / (phi * (1.0 - m_vals))
    samples = FrequencyDataset(omega=plant_data.omega, values=kstar,
                               metadata=dict(plant_data.metadata))
    return IdealControllerData(samples=samples, member_index=member, family=family)


@dataclass(frozen=True)
class ControllerDesign:
    """Engine output: the fitted controller plus method-level diagnostics."""

    method: str
    model: object
    order: int
    residual_max: float
    residual_rms: float
    diagnostics: object


def _residuals(model, data: FrequencyDataset):
    fitted = model(1j * data.omega)
    rel = np.abs(fitted - data.values) / np.maximum(np.abs(data.values), 1e-300)
    return float(np.max(rel)), float(np.sqrt(np.mean(rel**2)))


def detect_controller_order(kdata: IdealControllerData, tol: float = 1e-10) -> int:
    """Loewner rank of the ideal-controller samples (order auto-selection)."""
    pencil = build_pencil(*partition_data(kdata.samples))
    return detect_order(pencil, tol=tol).order


def design_controller(kdata: IdealControllerData, method: str, order: int = None,
                      tol: float = None, direct: bool = False,
                      flip_unstable: bool = False,
                      max_iters: int = None) -> ControllerDesign:
    """Fit a controller to the ideal samples with the chosen engine.

    ``order=None`` uses the Loewner rank of the samples for every engine
    (the greedy engine takes it as its order cap).  ``tol`` is the rank
    threshold for the detection, the error target for the greedy engine, and
    the pole-movement tolerance for vector fitting.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if kdata.n == 0:
        raise ValueError("no ideal-controller samples to fit")
    data = kdata.samples
    if method == "loewner":
        result = loewner_fit(data, order=order,
                             tol=tol if tol is not None else 1e-10)
        res_max, res_rms = _residuals(result.model, data)
        return ControllerDesign(method=method, model=result.model,
                                order=result.order, residual_max=res_max,
                                residual_rms=res_rms, diagnostics=result)
    if order is None:
        order = detect_controller_order(kdata)
    if method == "aaa":
        result = aaa_fit(data, tol=tol, max_order=order)
        res_max, res_rms = _residuals(result.model, data)
        return ControllerDesign(method=method, model=result.model,
                                order=result.model.order, residual_max=res_max,
                                residual_rms=res_rms, diagnostics=result)
    kwargs = {}
    if tol is not None:
        kwargs["pole_tol"] = tol
    if max_iters is not None:
        kwargs["max_iters"] = max_iters
    result = vf_fit(data, order=order, direct=direct,
                    flip_unstable=flip_unstable, **kwargs)
    if not result.converged:
        warnings.warn(f"vector fitting did not converge in {result.n_iters} "
                      "iterations; result kept", UserWarning, stacklevel=2)
    res_max, res_rms = _residuals(result.model, data)
    return ControllerDesign(method=method, model=result.model, order=order,
                            residual_max=res_max, residual_rms=res_rms,
                            diagnostics=result)


def closed_loop(plant, controller):
    """Unity-feedback closed-loop evaluator ``T = H K / (1 + H K)``.

    Both arguments are evaluators; T's poles are never located explicitly
    (the plant may be irrational), so only sampled values exist.  Raises
    when 1 + H K vanishes exactly at a requested point.
    """

    def transfer(s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        open_loop = np.asarray(plant(s_arr)) * np.asarray(controller(s_arr))
        denom = 1.0 + open_loop
        bad = np.nonzero(denom == 0)[0]
        if bad.size:
            raise LoopSingularError(complex(s_arr[bad[0]]))
        out = open_loop / denom
        return out[0] if np.ndim(s) == 0 else out.reshape(np.shape(s))

    return transfer


def classify_pole(pole: complex, margin: float = 1e-9) -> str:
    """Stability class by real part; the margin absorbs rounding at zero."""
    scale = max(1.0, abs(pole))
    if pole.real > margin * scale:
        return "unstable"
    if pole.real < -margin * scale:
        return "stable"
    return "marginal"


def sampled_nyquist_winding(plant, controller, omega: np.ndarray) -> int:
    """Winding count of 1 + H K around 0 along the sampled imaginary axis.

    Heuristic only: the contour is the data grid closed by conjugate
    symmetry, with the open loop taken to vanish at large frequency.  Grids
    too coarse near a crossing will miscount, so this is reported as a
    diagnostic, never used as a stability proof.
    """
    s = 1j * np.asarray(omega, dtype=float)
    upper = 1.0 + np.asarray(plant(s)) * np.asarray(controller(s))
    # conjugate symmetry supplies the negative-frequency half
    values = np.concatenate([np.conj(upper[::-1]), upper])
    angles = np.unwrap(np.angle(values))
    return int(np.round((angles[-1] - angles[0]) / (2.0 * np.pi)))


@dataclass(frozen=True)
class DesignReport:
    """Everything the report files need for one designed controller."""

    method: str
    controller: object
    order: int
    residual_max: float
    residual_rms: float
    pole_report: tuple
    omega: np.ndarray
    loop_values: np.ndarray
    loop_error_abs: np.ndarray
    gain_error_db: np.ndarray
    phase_error_deg: np.ndarray
    envelope_low_db: np.ndarray
    envelope_high_db: np.ndarray
    step_t: np.ndarray
    step_loop: np.ndarray
    step_references: np.ndarray
    winding_count: int
    notes: tuple


def evaluate_design(plant, design: ControllerDesign, kdata: IdealControllerData,
                    omega: np.ndarray = None, t_grid: np.ndarray = None,
                    synthesis_grid=None, with_step: bool = True) -> DesignReport:
    """Assemble the full comparison report for a fitted controller.

    Gain and phase errors compare the closed loop against the sample-paired
    reference values; for multi-member families the reported gain error is
    the distance to the pointwise min/max envelope of all members (zero
    inside the envelope).
    """
    omega = np.asarray(kdata.samples.omega if omega is None else omega, dtype=float)
    controller = design.model
    loop = closed_loop(plant, controller)
    loop_bode = bode_grid(loop, omega)

    members = kdata.family.members
    member_values = np.stack([np.asarray(m(1j * omega)) for m in members])
    ref_gain_db = 20 * np.log10(np.abs(member_values))
    env_low = ref_gain_db.min(axis=0)
    env_high = ref_gain_db.max(axis=0)
    gain = loop_bode.gain_db
    gain_error = np.where(gain > env_high, gain - env_high,
                          np.where(gain < env_low, gain - env_low, 0.0))
    loop_error_abs = np.min(np.abs(loop_bode.values - member_values), axis=0)

    # phase error against the nearest member, in unwrapped degrees
    phase_errors = []
    for row in member_values:
        ref_phase = np.degrees(np.unwrap(np.angle(row)))
        phase_errors.append(np.abs(loop_bode.phase_deg - ref_phase))
    phase_error = np.min(np.stack(phase_errors), axis=0)

    poles = poles_of(controller) if not callable_only(controller) else np.array([])
    pole_report = tuple((complex(p), classify_pole(p)) for p in poles)

    if with_step:
        if t_grid is None:
            t_grid = np.linspace(0.0, 20.0, 801)
        if synthesis_grid is None:
            synthesis_grid = grid_for_band(float(omega[-1]))
        step_loop = step_response(loop, t_grid, synthesis_grid)
        step_refs = np.stack([step_response(m, t_grid, synthesis_grid)
                              for m in members])
    else:
        t_grid = np.empty(0)
        step_loop = np.empty(0)
        step_refs = np.empty((len(members), 0))

    winding = sampled_nyquist_winding(plant, controller, omega)
    notes = ("winding count is a sampled diagnostic, not a stability proof",)
    return DesignReport(method=design.method, controller=controller,
                        order=design.order, residual_max=design.residual_max,
                        residual_rms=design.residual_rms, pole_report=pole_report,
                        omega=omega, loop_values=loop_bode.values,
                        loop_error_abs=loop_error_abs,
                        gain_error_db=gain_error, phase_error_deg=phase_error,
                        envelope_low_db=env_low, envelope_high_db=env_high,
                        step_t=np.asarray(t_grid, dtype=float), step_loop=step_loop,
                        step_references=step_refs, winding_count=winding,
                        notes=notes)


def callable_only(model) -> bool:
    """True for bare evaluators that carry no model structure."""
    from .models import (BarycentricModel, DescriptorRealization,
                         PoleResidueModel, RationalPolyForm)

    return not isinstance(model, (BarycentricModel, DescriptorRealization,
                                  PoleResidueModel, RationalPolyForm))


def controller_poly_form(design: ControllerDesign):
    """Monic coefficient form of a designed controller (low orders only)."""
    return to_poly_form(design.model)
