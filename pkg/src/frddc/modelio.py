"""Model serialization to and from JSON documents.

Schema: a JSON object with a ``form`` discriminator and the fields of the
corresponding model class.

* ``descriptor`` -- ``E``, ``A``, ``B``, ``C``, ``D``: real matrices as
  nested lists of floats.
* ``barycentric`` -- ``nodes``, ``values``, ``weights``: lists of
  ``[re, im]`` pairs; ``constant``: one ``[re, im]`` pair.
* ``pole_residue`` -- ``poles``, ``residues``: lists of ``[re, im]`` pairs;
  ``direct``: float.
* ``poly`` -- ``num``, ``den``: real coefficient lists, descending powers.

Floats are emitted with shortest round-trip repr, so save/load is
bit-identical.
"""

import json

import numpy as np

from .errors import ModelFormatError
from .models import (
    BarycentricModel,
    DescriptorRealization,
    PoleResidueModel,
    RationalPolyForm,
)

FORM_NAMES = ("descriptor", "barycentric", "pole_residue", "poly")


def _complex_pairs(arr):
    return [[float(z.real), float(z.imag)] for z in np.asarray(arr, dtype=complex)]


def _from_pairs(pairs, what):
    try:
        return np.array([complex(re, im) for re, im in pairs], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field {what!r} is not a list of [re, im] pairs") from exc


def model_to_dict(model) -> dict:
    if isinstance(model, DescriptorRealization):
        return {"form": "descriptor",
                **{k: getattr(model, k).tolist() for k in ("E", "A", "B", "C", "D")}}
    if isinstance(model, BarycentricModel):
        return {"form": "barycentric",
                "nodes": _complex_pairs(model.nodes),
                "values": _complex_pairs(model.values),
                "weights": _complex_pairs(model.weights),
                "constant": [model.constant.real, model.constant.imag]}
    if isinstance(model, PoleResidueModel):
        return {"form": "pole_residue",
                "poles": _complex_pairs(model.poles),
                "residues": _complex_pairs(model.residues),
                "direct": model.direct}
    if isinstance(model, RationalPolyForm):
        return {"form": "poly", "num": model.num.tolist(), "den": model.den.tolist()}
    raise ModelFormatError(f"unsupported model type {type(model).__name__}")


def model_from_dict(doc: dict):
    if not isinstance(doc, dict) or "form" not in doc:
        raise ModelFormatError("model document must be an object with a 'form' field")
    form = doc["form"]
    try:
        if form == "descriptor":
            return DescriptorRealization(E=doc["E"], A=doc["A"], B=doc["B"],
                                         C=doc["C"], D=doc.get("D"))
        if form == "barycentric":
            const = doc.get("constant", [0.0, 0.0])
            return BarycentricModel(nodes=_from_pairs(doc["nodes"], "nodes"),
                                    values=_from_pairs(doc["values"], "values"),
                                    weights=_from_pairs(doc["weights"], "weights"),
                                    constant=complex(const[0], const[1]))
        if form == "pole_residue":
            return PoleResidueModel(poles=_from_pairs(doc["poles"], "poles"),
                                    residues=_from_pairs(doc["residues"], "residues"),
                                    direct=doc.get("direct", 0.0))
        if form == "poly":
            return RationalPolyForm(num=doc["num"], den=doc["den"])
    except KeyError as exc:
        raise ModelFormatError(f"model form {form!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid {form!r} model: {exc}") from exc
    raise ModelFormatError(
        f"unknown model form {form!r}; expected one of {', '.join(FORM_NAMES)}"
    )


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not a JSON document: {exc}") from exc
    return model_from_dict(doc)
