"""Plant models, frequency-response sampling, noise, and dataset file IO.

Datasets hold single-input single-output samples H(i omega_k) on a positive,
strictly increasing frequency grid.  Files use a small CSV schema: optional
``# key=value`` metadata comments, a mandatory ``omega,re,im`` header, then
one row per sample with full-precision decimal floats (shortest round-trip
repr), so save followed by load is bit-identical.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BranchPointError, DatasetFormatError
from .models import DescriptorRealization
from .rng import uniform


@dataclass(frozen=True)
class FrequencyDataset:
    """Immutable SISO frequency-response samples with string metadata."""

    omega: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float)
        values = np.array(self.values, dtype=complex)
        if omega.ndim != 1 or omega.shape != values.shape:
            raise ValueError("omega and values must be 1-D arrays of equal length")
        if omega.size and (np.any(omega <= 0) or np.any(np.diff(omega) <= 0)):
            raise ValueError("omega must be positive and strictly increasing")
        omega.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def n(self) -> int:
        return self.omega.size

    def take(self, indices) -> "FrequencyDataset":
        idx = np.asarray(indices, dtype=int)
        return FrequencyDataset(omega=self.omega[idx], values=self.values[idx],
                                metadata=dict(self.metadata))

    def with_metadata(self, **extra) -> "FrequencyDataset":
        meta = dict(self.metadata)
        meta.update({k: str(v) for k, v in extra.items()})
        return FrequencyDataset(omega=self.omega, values=self.values, metadata=meta)


# ---------------------------------------------------------------------------
# plants


def academic_plant() -> DescriptorRealization:
    """First-order test plant with state-space data (1, -1, 0.5, 1, 0)."""
    return DescriptorRealization(E=[[1.0]], A=[[-1.0]], B=[[0.5]], C=[[1.0]])


@dataclass(frozen=True)
class TransportPlant:
    """Transport equation with source and boundary control, measured mid-domain.

    Transfer function from boundary input to the measurement point:

        H(s) = sqrt(pi/s) * exp(-x_m^2 s) * w0^2 / (s^2 + m w0 s + w0^2)

    with the principal branch of the square root.  Irrational: infinitely
    many poles are absent but the diffusion-like sqrt and the transport delay
    make every rational fit an approximation.  s = 0 is a branch point and
    cannot be evaluated.
    """

    x_m: float = 1.9592
    omega0: float = 3.0
    damping: float = 0.5

    def __call__(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        if np.any(s_arr == 0):
            raise BranchPointError("transport plant has a branch point at s = 0")
        w0 = self.omega0
        val = (np.sqrt(np.pi / s_arr) * np.exp(-self.x_m**2 * s_arr)
               * w0**2 / (s_arr**2 + self.damping * w0 * s_arr + w0**2))
        return val[0] if np.ndim(s) == 0 else val.reshape(np.shape(s))


PLANT_IDS = ("academic", "transport")


def make_plant(plant_id: str, **params):
    """Instantiate a built-in plant evaluator by id."""
    if plant_id == "academic":
        if params:
            raise ValueError(f"academic plant takes no parameters, got {sorted(params)}")
        return academic_plant()
    if plant_id == "transport":
        return TransportPlant(**params)
    raise ValueError(f"unknown plant id {plant_id!r}; expected one of {PLANT_IDS}")


def sample_plant(plant, n: int, wmin: float, wmax: float,
                 plant_id: str = None) -> FrequencyDataset:
    """Evaluate a plant on a log-spaced grid of n points over [wmin, wmax]."""
    if n < 1:
        raise ValueError("need at least one sample")
    if not (0 < wmin < wmax):
        raise ValueError("need 0 < wmin < wmax")
    omega = np.logspace(np.log10(wmin), np.log10(wmax), n)
    values = np.asarray(plant(1j * omega), dtype=complex)
    meta = {"n": str(n), "wmin": repr(wmin), "wmax": repr(wmax)}
    if plant_id:
        meta["plant"] = plant_id
    return FrequencyDataset(omega=omega, values=values, metadata=meta)


# ---------------------------------------------------------------------------
# noise and partitioning


def add_noise(data: FrequencyDataset, amplitude: float, seed: int) -> FrequencyDataset:
    """Multiplicative uniform noise: values scaled by (1 + amplitude * u_i).

    u_i are uniform in [0, 1) from the repo's portable counter-based
    generator, so a seed pins the dataset bit-exactly on any platform.
    """
    if amplitude < 0:
        raise ValueError("noise amplitude must be nonnegative")
    factors = 1.0 + amplitude * uniform(seed, data.n)
    noisy = data.values * factors
    return FrequencyDataset(omega=data.omega, values=noisy,
                            metadata=dict(data.metadata)).with_metadata(
                                noise=repr(amplitude), seed=seed)


def split_subgrids(data: FrequencyDataset, n_s: int):
    """Round-robin partition into n_s sub-grids; sample i joins member i mod n_s.

    Returns (list of sub-datasets, member index per original sample).  Every
    member sees full-band coverage, which keeps each sub-grid informative.
    """
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    if n_s > data.n:
        raise ValueError(f"too many members: n_s = {n_s} exceeds {data.n} samples")
    member = np.arange(data.n) % n_s
    parts = [data.take(np.nonzero(member == j)[0]) for j in range(n_s)]
    return parts, member


# ---------------------------------------------------------------------------
# file IO


def save_dataset(data: FrequencyDataset, path) -> None:
    lines = [f"# {k}={v}" for k, v in sorted(data.metadata.items())]
    lines.append("omega,re,im")
    for w, v in zip(data.omega, data.values):
        lines.append(f"{float(w)!r},{float(v.real)!r},{float(v.imag)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path) -> FrequencyDataset:
    metadata = {}
    omega = []
    values = []
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    metadata[key.strip()] = val.strip()
                continue
            if not header_seen:
                if line.replace(" ", "") != "omega,re,im":
                    raise DatasetFormatError(
                        f"expected header 'omega,re,im', got {line!r}", line=lineno)
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise DatasetFormatError(
                    f"expected 3 comma-separated fields, got {len(parts)}", line=lineno)
            try:
                w, re_v, im_v = (float(p) for p in parts)
            except ValueError:
                raise DatasetFormatError(f"non-numeric field in {line!r}",
                                         line=lineno) from None
            if omega and w <= omega[-1]:
                raise DatasetFormatError(
                    f"omega not strictly increasing at {w!r}", line=lineno)
            if w <= 0:
                raise DatasetFormatError(f"omega must be positive, got {w!r}",
                                         line=lineno)
            omega.append(w)
            values.append(complex(re_v, im_v))
    if not header_seen:
        raise DatasetFormatError("empty dataset file: header 'omega,re,im' missing")
    if not omega:
        raise DatasetFormatError("dataset has a header but no samples")
    return FrequencyDataset(omega=np.array(omega), values=np.array(values),
                            metadata=metadata)
