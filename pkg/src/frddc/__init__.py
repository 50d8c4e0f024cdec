"""Frequency-response data-driven controller design.

Given frequency samples of a plant and a target closed-loop model, the
toolkit inverts the target into ideal-controller samples and fits a rational
feedback controller to them with one of three engines: Loewner interpolation,
greedy barycentric approximation, or vector fitting.  Targets may be a single
model or a family of them; data may be exact or noise-perturbed.
"""

from .errors import (
    BranchPointError,
    CoefficientFormError,
    ConfigError,
    DatasetFormatError,
    DegeneratePencilError,
    FrddcError,
    LoopSingularError,
    ModelFormatError,
    PlantZeroError,
    PoleEvaluationError,
    RealificationError,
    ReferenceSaturationError,
)
from .models import (
    BarycentricModel,
    DescriptorRealization,
    PoleResidueModel,
    RationalPolyForm,
    descriptor_eigenvalues,
    format_poly,
    poles_of,
    realify,
    to_poly_form,
)
from .responses import (
    SynthesisGrid,
    bode_grid,
    dc_gain,
    grid_for_band,
    step_response,
)
from .data import (
    FrequencyDataset,
    TransportPlant,
    academic_plant,
    add_noise,
    load_dataset,
    make_plant,
    sample_plant,
    save_dataset,
    split_subgrids,
)
from .reference import (
    DelayedOscillatoryReference,
    ReferenceFamily,
    SecondOrderReference,
    second_order_family,
    transport_family,
    transport_uncertain_p_values,
)
from .modelio import load_model, model_from_dict, model_to_dict, save_model
from .loewner import LoewnerFitResult, detect_order, loewner_fit, partition_data
from .aaa import AaaFitResult, aaa_fit, barycentric_to_realization
from .vecfit import VfFitResult, vf_fit, vf_init_poles
from .pipeline import (
    ControllerDesign,
    DesignReport,
    IdealControllerData,
    closed_loop,
    design_controller,
    detect_controller_order,
    evaluate_design,
    ideal_controller_samples,
)

__version__ = "0.1.0"

__all__ = [
    "AaaFitResult",
    "BarycentricModel",
    "BranchPointError",
    "CoefficientFormError",
    "ConfigError",
    "ControllerDesign",
    "DatasetFormatError",
    "DegeneratePencilError",
    "DelayedOscillatoryReference",
    "DescriptorRealization",
    "DesignReport",
    "FrddcError",
    "FrequencyDataset",
    "IdealControllerData",
    "LoewnerFitResult",
    "LoopSingularError",
    "ModelFormatError",
    "PlantZeroError",
    "PoleEvaluationError",
    "PoleResidueModel",
    "RationalPolyForm",
    "RealificationError",
    "ReferenceFamily",
    "ReferenceSaturationError",
    "SecondOrderReference",
    "SynthesisGrid",
    "TransportPlant",
    "VfFitResult",
    "aaa_fit",
    "academic_plant",
    "add_noise",
    "barycentric_to_realization",
    "bode_grid",
    "closed_loop",
    "dc_gain",
    "descriptor_eigenvalues",
    "design_controller",
    "detect_controller_order",
    "detect_order",
    "evaluate_design",
    "format_poly",
    "grid_for_band",
    "ideal_controller_samples",
    "load_dataset",
    "load_model",
    "loewner_fit",
    "make_plant",
    "model_from_dict",
    "model_to_dict",
    "partition_data",
    "poles_of",
    "realify",
    "sample_plant",
    "save_dataset",
    "save_model",
    "second_order_family",
    "split_subgrids",
    "step_response",
    "to_poly_form",
    "transport_family",
    "transport_uncertain_p_values",
    "vf_fit",
    "vf_init_poles",
]
