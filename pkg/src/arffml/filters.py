"""Dataset-to-dataset filters: imputation, discretisation and class remapping.

Each filter is split into a ``fit_*`` step that learns parameters from a
training set and an ``apply_*`` step that reuses them, so development and
test data are always transformed with train-fitted parameters.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .arff import AttributeSpec, Dataset, format_number

__all__ = [
    "ClassRemap",
    "DiscretizationModel",
    "FilterError",
    "FilterStep",
    "FittedPipeline",
    "ImputationModel",
    "WEEKDAYS",
    "apply_class_remap",
    "apply_discretization",
    "apply_imputation",
    "fit_equal_width",
    "fit_imputation",
    "fit_pipeline",
    "fit_supervised_mdl",
    "interval_labels",
    "load_pipeline",
    "mdl_cut_points",
    "parse_interval_label",
]

MODEL_VERSION_LINE = "# arffml-filter 1"

WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_WEEKDAY_ALIASES = {
    **{d.lower(): d for d in WEEKDAYS},
    "monday": "Mon",
    "tuesday": "Tue",
    "tues": "Tue",
    "wednesday": "Wed",
    "thursday": "Thu",
    "thur": "Thu",
    "thurs": "Thu",
    "friday": "Fri",
    "saturday": "Sat",
    "sunday": "Sun",
}
REMAP_SCHEMES = {
    "seven_day": None,
    "weekday_sat_sun": (("Weekday", "Sat", "Sun"), (0, 0, 0, 0, 0, 1, 2)),
    "weekday_weekend": (("Weekday", "Weekend"), (0, 0, 0, 0, 0, 1, 1)),
}


class FilterError(ValueError):
    pass


def _check_schema(d: Dataset, attributes: tuple[AttributeSpec, ...], what: str) -> None:
    if d.attributes == attributes:
        return
    if len(d.attributes) != len(attributes):
        raise FilterError(
            f"{what} was fitted on {len(attributes)} attributes, data has {len(d.attributes)}"
        )
    for got, want in zip(d.attributes, attributes):
        if got != want:
            raise FilterError(f"{what}: attribute {got.name!r} does not match fitted {want.name!r}")


# --------------------------------------------------------------------------
# Missing-value imputation


@dataclass(frozen=True)
class ImputationModel:
    """Per-attribute fill values: a mean for numeric, a label index for nominal."""

    attributes: tuple[AttributeSpec, ...]
    fill: tuple[float | None, ...]


def fit_imputation(d: Dataset, ignore: Iterable[int] = ()) -> ImputationModel:
    """Learn means and modes; modes tie toward the lowest label index.

    Attributes listed in ``ignore`` (typically the class) get no fill value.
    """
    if d.n_rows == 0:
        raise FilterError("cannot fit imputation on an empty dataset")
    skip = {d.attribute_index(j) for j in ignore}
    fill = []
    for j, attr in enumerate(d.attributes):
        col = d.values[:, j]
        known = col[~np.isnan(col)]
        if j in skip or known.size == 0:
            fill.append(None)
        elif attr.is_nominal:
            counts = np.bincount(known.astype(int), minlength=len(attr.labels))
            fill.append(float(np.argmax(counts)))
        else:
            fill.append(float(known.mean()))
    return ImputationModel(d.attributes, tuple(fill))


def apply_imputation(d: Dataset, m: ImputationModel) -> Dataset:
    _check_schema(d, m.attributes, "imputation model")
    values = d.values.copy()
    for j, v in enumerate(m.fill):
        if v is not None:
            col = values[:, j]
            col[np.isnan(col)] = v
    return d.replace(values=values)


# --------------------------------------------------------------------------
# Interval labels

_NUM = r"-?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:e[+-]?[0-9]+)?"
_LABEL_RE = re.compile(rf"\((-inf|{_NUM})-(inf|{_NUM})([\])])\Z")


def interval_labels(cuts: Sequence[float]) -> list[str]:
    """Weka-style labels: ``(-inf-c1]``, ``(c1-c2]``, ..., ``(cn-inf)``."""
    if len(cuts) == 0:
        return ["(-inf-inf)"]
    text = [format_number(c) for c in cuts]
    labels = [f"(-inf-{text[0]}]"]
    labels += [f"({a}-{b}]" for a, b in zip(text, text[1:])]
    labels.append(f"({text[-1]}-inf)")
    return labels


def parse_interval_label(label: str) -> tuple[float, float]:
    """Inverse of :func:`interval_labels` for a single label: ``(low, high)``."""
    m = _LABEL_RE.match(label)
    if m is None:
        raise ValueError(f"not an interval label: {label!r}")
    lo, hi, close = m.groups()
    low = -math.inf if lo == "-inf" else float(lo)
    high = math.inf if hi == "inf" else float(hi)
    if (close == ")") != math.isinf(high):
        raise ValueError(f"bad interval closure in {label!r}")
    return low, high


# --------------------------------------------------------------------------
# Discretisation


@dataclass(frozen=True)
class DiscretizationModel:
    """Cut points per selected attribute; everything else passes through."""

    attributes: tuple[AttributeSpec, ...]
    cuts: dict[int, tuple[float, ...]]
    mode: str
    bins: int | None = None

    def labels(self, j: int) -> list[str]:
        return interval_labels(self.cuts[j])

    def output_attributes(self) -> tuple[AttributeSpec, ...]:
        return tuple(
            AttributeSpec(a.name, tuple(self.labels(j))) if j in self.cuts else a
            for j, a in enumerate(self.attributes)
        )


def _selected_numeric(d: Dataset, attrs) -> list[int]:
    if attrs is None:
        return [j for j, a in enumerate(d.attributes) if a.is_numeric]
    selected = sorted({d.attribute_index(a) for a in attrs})
    for j in selected:
        if d.attributes[j].is_nominal:
            raise FilterError(f"attribute {d.attributes[j].name!r} is nominal, cannot discretize")
    return selected


def fit_equal_width(d: Dataset, attrs, k: int) -> DiscretizationModel:
    """Equal-width bins over the observed range; ``attrs=None`` means all numeric."""
    if k < 1:
        raise FilterError(f"bin count must be >= 1, got {k}")
    cuts = {}
    for j in _selected_numeric(d, attrs):
        col = d.values[:, j]
        known = col[~np.isnan(col)]
        if known.size == 0:
            raise FilterError(f"attribute {d.attributes[j].name!r} is entirely missing")
        lo, hi = float(known.min()), float(known.max())
        if lo == hi:
            cuts[j] = ()
            continue
        points = [lo + i * (hi - lo) / k for i in range(1, k)]
        cuts[j] = tuple(sorted(set(points)))
    return DiscretizationModel(d.attributes, cuts, "equal_width", k)


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Row-wise entropy in bits of class-count vectors."""
    counts = np.atleast_2d(counts).astype(float)
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=1)


def mdl_cut_points(values: np.ndarray, classes: np.ndarray, n_classes: int) -> list[float]:
    """Recursive entropy-minimising cuts with the Fayyad-Irani MDL stopping rule.

    Candidate cuts are midpoints between adjacent distinct values whose
    class distributions differ (boundary points). Missing values are ignored.
    """
    ok = ~np.isnan(values) & ~np.isnan(classes)
    values, classes = values[ok], classes[ok].astype(int)
    if values.size == 0:
        return []
    distinct, inverse = np.unique(values, return_inverse=True)
    groups = np.zeros((distinct.size, n_classes))
    np.add.at(groups, (inverse, classes), 1.0)
    cuts: list[float] = []
    _mdl_split(distinct, groups, cuts)
    return sorted(cuts)


def _mdl_split(distinct: np.ndarray, groups: np.ndarray, cuts: list[float]) -> None:
    if distinct.size < 2:
        return
    total = groups.sum(axis=0)
    n = total.sum()
    pure = np.count_nonzero(groups, axis=1) == 1
    same = (groups[:-1] > 0) == (groups[1:] > 0)
    boundary = ~(pure[:-1] & pure[1:] & same.all(axis=1))
    if not boundary.any():
        return
    left = np.cumsum(groups, axis=0)[:-1]
    right = total - left
    n_left = left.sum(axis=1)
    n_right = n - n_left
    weighted = (n_left * _entropy(left) + n_right * _entropy(right)) / n
    weighted = np.where(boundary, weighted, np.inf)
    best = int(np.argmin(weighted))

    ent = _entropy(total)[0]
    ent_left = _entropy(left[best])[0]
    ent_right = _entropy(right[best])[0]
    gain = ent - weighted[best]
    k = np.count_nonzero(total)
    k1 = np.count_nonzero(left[best])
    k2 = np.count_nonzero(right[best])
    delta = math.log2(3**k - 2) - (k * ent - k1 * ent_left - k2 * ent_right)
    if gain <= (math.log2(n - 1) + delta) / n:
        return
    cut = (distinct[best] + distinct[best + 1]) / 2.0
    if cut >= distinct[best + 1]:
        cut = distinct[best]
    cuts.append(float(cut))
    _mdl_split(distinct[: best + 1], groups[: best + 1], cuts)
    _mdl_split(distinct[best + 1 :], groups[best + 1 :], cuts)


def fit_supervised_mdl(d: Dataset, attrs, class_attr: int | str) -> DiscretizationModel:
    """Supervised discretisation; the class attribute itself is never selected."""
    c = d.attribute_index(class_attr)
    if d.attributes[c].is_numeric:
        raise FilterError(f"class attribute {d.attributes[c].name!r} is not nominal")
    if d.n_rows == 0:
        raise FilterError("cannot fit supervised discretization on an empty dataset")
    n_classes = len(d.attributes[c].labels)
    cuts = {}
    for j in _selected_numeric(d, attrs):
        if j == c:
            continue
        cuts[j] = tuple(mdl_cut_points(d.values[:, j], d.values[:, c], n_classes))
    return DiscretizationModel(d.attributes, cuts, "supervised_mdl")


def apply_discretization(d: Dataset, m: DiscretizationModel) -> Dataset:
    """Map values to bins: intervals are left-open, right-closed, ends unbounded."""
    _check_schema(d, m.attributes, "discretization model")
    values = d.values.copy()
    for j, cuts in m.cuts.items():
        col = values[:, j]
        known = ~np.isnan(col)
        col[known] = np.searchsorted(np.asarray(cuts, dtype=float), col[known], side="left")
    return Dataset(d.relation, m.output_attributes(), values)


# --------------------------------------------------------------------------
# Class remapping


@dataclass(frozen=True)
class ClassRemap:
    """Collapse a seven-label weekday attribute into a coarser target."""

    attribute: int | str
    scheme: str = "seven_day"

    def __post_init__(self):
        if self.scheme not in REMAP_SCHEMES:
            raise FilterError(
                f"unknown remap scheme {self.scheme!r}; expected one of {sorted(REMAP_SCHEMES)}"
            )

    def mapping(self) -> tuple[tuple[str, ...] | None, tuple[int, ...]]:
        entry = REMAP_SCHEMES[self.scheme]
        if entry is None:
            return None, tuple(range(7))
        return entry


def canonical_weekday(label: str) -> str | None:
    return _WEEKDAY_ALIASES.get(label.strip().lower())


def apply_class_remap(d: Dataset, r: ClassRemap) -> Dataset:
    j = d.attribute_index(r.attribute)
    attr = d.attributes[j]
    if attr.is_numeric or len(attr.labels) != 7:
        raise FilterError(f"attribute {attr.name!r} must be nominal with exactly 7 weekday labels")
    canon = [canonical_weekday(lab) for lab in attr.labels]
    if tuple(canon) != WEEKDAYS:
        raise FilterError(f"attribute {attr.name!r} labels are not Mon..Sun in order: {attr.labels}")
    labels, table = r.mapping()
    if labels is None:
        return d
    values = d.values.copy()
    col = values[:, j]
    known = ~np.isnan(col)
    col[known] = np.asarray(table, dtype=float)[col[known].astype(int)]
    attributes = list(d.attributes)
    attributes[j] = AttributeSpec(attr.name, labels)
    return Dataset(d.relation, attributes, values)


# --------------------------------------------------------------------------
# Pipelines

STEP_KINDS = ("replace_missing", "equal_width", "supervised_mdl", "class_remap")


@dataclass(frozen=True)
class FilterStep:
    """Unfitted filter configuration.

    ``attributes`` of None selects every eligible attribute (all numeric ones
    for discretisation). ``bins`` applies to ``equal_width``, ``scheme`` and
    ``attribute`` to ``class_remap``.
    """

    kind: str
    bins: int | None = None
    attributes: tuple[str, ...] | None = None
    scheme: str | None = None
    attribute: str | None = None

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise FilterError(f"unknown filter {self.kind!r}; expected one of {list(STEP_KINDS)}")
        if self.kind == "equal_width" and (self.bins is None or self.bins < 1):
            raise FilterError("equal_width needs bins >= 1")
        if self.attributes is not None:
            object.__setattr__(self, "attributes", tuple(self.attributes))


@dataclass
class FittedPipeline:
    """An ordered list of fitted filter models, applied in sequence."""

    steps: list = field(default_factory=list)

    def apply(self, d: Dataset) -> Dataset:
        for step in self.steps:
            if isinstance(step, ImputationModel):
                d = apply_imputation(d, step)
            elif isinstance(step, DiscretizationModel):
                d = apply_discretization(d, step)
            else:
                d = apply_class_remap(d, step)
        return d

    def dumps(self) -> str:
        return MODEL_VERSION_LINE + "\n" + json.dumps(
            {"steps": [_step_to_json(s) for s in self.steps]}, indent=1
        ) + "\n"


def fit_pipeline(steps: Sequence[FilterStep], train: Dataset, class_attr=None) -> FittedPipeline:
    """Fit ``steps`` in order, each on the output of the previous one.

    The class attribute is excluded from imputation and from supervised
    discretisation; equal-width binning does include a numeric class, which
    is how a numeric target becomes a nominal one.
    """
    fitted = FittedPipeline()
    d = train
    for step in steps:
        c = None if class_attr is None else d.attribute_index(class_attr)
        if step.kind == "replace_missing":
            model = fit_imputation(d, ignore=() if c is None else (c,))
        elif step.kind == "equal_width":
            model = fit_equal_width(d, step.attributes, step.bins)
        elif step.kind == "supervised_mdl":
            if c is None:
                raise FilterError("supervised_mdl needs a class attribute")
            attrs = step.attributes
            if attrs is not None:
                attrs = [a for a in attrs if d.attribute_index(a) != c]
            model = fit_supervised_mdl(d, attrs, c)
        else:
            target = step.attribute if step.attribute is not None else class_attr
            if target is None:
                raise FilterError("class_remap needs an attribute")
            model = ClassRemap(d.attribute_index(target), step.scheme or "seven_day")
        d = FittedPipeline([model]).apply(d)
        fitted.steps.append(model)
    return fitted


def _spec_to_json(a: AttributeSpec):
    return {"name": a.name, "labels": None if a.labels is None else list(a.labels)}


def _spec_from_json(obj) -> AttributeSpec:
    return AttributeSpec(obj["name"], None if obj["labels"] is None else tuple(obj["labels"]))


def _step_to_json(step) -> dict:
    if isinstance(step, ImputationModel):
        return {
            "type": "imputation",
            "attributes": [_spec_to_json(a) for a in step.attributes],
            "fill": list(step.fill),
        }
    if isinstance(step, DiscretizationModel):
        return {
            "type": "discretization",
            "mode": step.mode,
            "bins": step.bins,
            "attributes": [_spec_to_json(a) for a in step.attributes],
            "cuts": {str(j): list(c) for j, c in sorted(step.cuts.items())},
        }
    return {"type": "class_remap", "attribute": step.attribute, "scheme": step.scheme}


def _step_from_json(obj):
    kind = obj["type"]
    if kind == "imputation":
        return ImputationModel(
            tuple(_spec_from_json(a) for a in obj["attributes"]),
            tuple(None if v is None else float(v) for v in obj["fill"]),
        )
    if kind == "discretization":
        return DiscretizationModel(
            tuple(_spec_from_json(a) for a in obj["attributes"]),
            {int(j): tuple(float(x) for x in c) for j, c in obj["cuts"].items()},
            obj["mode"],
            obj["bins"],
        )
    if kind == "class_remap":
        return ClassRemap(obj["attribute"], obj["scheme"])
    raise FilterError(f"unknown filter model type {kind!r}")


def load_pipeline(text: str) -> FittedPipeline:
    first, _, body = text.partition("\n")
    if first.strip() != MODEL_VERSION_LINE:
        raise FilterError(f"not a filter model file (expected {MODEL_VERSION_LINE!r})")
    try:
        obj = json.loads(body)
        return FittedPipeline([_step_from_json(s) for s in obj["steps"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise FilterError(f"malformed filter model: {exc}") from exc
