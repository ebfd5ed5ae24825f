"""ARFF reading and writing, plus the in-memory dataset model.

Every cell is stored as a float in a single ``(n_rows, n_attributes)`` array:
numeric cells hold their value, nominal cells hold the 0-based label index,
and NaN marks a missing cell. This is the same layout Weka's ``Instances``
uses and it keeps the filters and classifiers vectorisable.

Only numeric (``numeric``/``real``/``integer``) and nominal attributes are
supported. ``string``, ``date`` and ``relational`` attributes and sparse rows
are rejected with an :class:`ArffError`.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

__all__ = [
    "ArffError",
    "AttributeSpec",
    "ColumnStats",
    "Dataset",
    "column_stats",
    "format_number",
    "parse_arff",
    "read_arff",
    "write_arff",
]

_NUMBER_RE = re.compile(r"[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?\Z")
_NUMERIC_TYPES = {"numeric", "real", "integer"}
_UNSUPPORTED_TYPES = {"string", "date", "relational"}
_ESCAPES = {"n": "\n", "r": "\r", "t": "\t", "\\": "\\", "'": "'", '"': '"'}


class ArffError(ValueError):
    """Malformed or unsupported ARFF input, with a 1-based position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class AttributeSpec:
    """A column declaration: numeric when ``labels`` is None, else nominal."""

    name: str
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("attribute name must be non-empty")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if not self.labels:
                raise ValueError(f"nominal attribute {self.name!r} has no labels")
            if len(set(self.labels)) != len(self.labels):
                raise ValueError(f"nominal attribute {self.name!r} has duplicate labels")

    @classmethod
    def numeric(cls, name: str) -> AttributeSpec:
        return cls(name)

    @classmethod
    def nominal(cls, name: str, labels: Iterable[str]) -> AttributeSpec:
        return cls(name, tuple(labels))

    @property
    def is_nominal(self) -> bool:
        return self.labels is not None

    @property
    def is_numeric(self) -> bool:
        return self.labels is None

    @property
    def kind(self) -> str:
        return "nominal" if self.is_nominal else "numeric"

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except (AttributeError, ValueError):
            raise KeyError(f"{label!r} is not a label of attribute {self.name!r}") from None


class Dataset:
    """An immutable table: relation name, attribute specs and a value matrix."""

    __slots__ = ("relation", "attributes", "values")

    def __init__(self, relation: str, attributes: Sequence[AttributeSpec], values=None):
        attributes = tuple(attributes)
        if values is None:
            values = np.empty((0, len(attributes)))
        values = np.array(values, dtype=float, copy=True).reshape(-1, len(attributes))
        names = [a.name for a in attributes]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise ValueError(f"duplicate attribute name {dup!r}")
        for j, attr in enumerate(attributes):
            col = values[:, j]
            known = col[~np.isnan(col)]
            if attr.is_nominal:
                bad = (known < 0) | (known >= len(attr.labels)) | (known != np.floor(known))
                if bad.any():
                    raise ValueError(f"invalid label index in nominal attribute {attr.name!r}")
            elif np.isinf(known).any():
                raise ValueError(f"non-finite value in numeric attribute {attr.name!r}")
        values.flags.writeable = False
        object.__setattr__(self, "relation", relation)
        object.__setattr__(self, "attributes", attributes)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.relation == other.relation
            and self.attributes == other.attributes
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"Dataset({self.relation!r}, {len(self.attributes)} attributes, "
            f"{self.n_rows} rows)"
        )

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def attribute_index(self, ref: int | str) -> int:
        """Resolve an attribute name or (possibly negative) index."""
        if isinstance(ref, str):
            for j, attr in enumerate(self.attributes):
                if attr.name == ref:
                    return j
            raise KeyError(f"no attribute named {ref!r}")
        j = int(ref)
        if j < 0:
            j += self.n_attributes
        if not 0 <= j < self.n_attributes:
            raise IndexError(f"attribute index {ref} out of range")
        return j

    def column(self, ref: int | str) -> np.ndarray:
        return self.values[:, self.attribute_index(ref)]

    def replace(self, *, relation=None, attributes=None, values=None) -> Dataset:
        return Dataset(
            self.relation if relation is None else relation,
            self.attributes if attributes is None else attributes,
            self.values if values is None else values,
        )

    def take(self, rows) -> Dataset:
        return self.replace(values=self.values[np.asarray(rows, dtype=int)])

    def cell(self, row: int, ref: int | str):
        """Decoded cell: float for numeric, label for nominal, None if missing."""
        j = self.attribute_index(ref)
        v = self.values[row, j]
        if math.isnan(v):
            return None
        attr = self.attributes[j]
        return attr.labels[int(v)] if attr.is_nominal else float(v)


# --------------------------------------------------------------------------
# Tokenising


@dataclass
class _Token:
    text: str
    column: int
    quoted: bool = False


def _is_sep(ch: str) -> bool:
    return ch.isspace() or ch in ",{}"


def _tokenize(line: str, lineno: int) -> list[_Token]:
    """Split a line into bare words, quoted strings and the punctuation ``,{}``."""
    tokens = []
    i, n = 0, len(line)
    while i < n:
        ch = line[i]
        if ch.isspace():
            i += 1
        elif ch in ",{}":
            tokens.append(_Token(ch, i + 1))
            i += 1
        elif ch in "'\"":
            start, quote = i, ch
            i += 1
            buf = []
            while True:
                if i >= n:
                    raise ArffError("unterminated quoted string", lineno, start + 1)
                c = line[i]
                if c == "\\" and i + 1 < n:
                    nxt = line[i + 1]
                    buf.append(_ESCAPES.get(nxt, "\\" + nxt))
                    i += 2
                elif c == quote:
                    i += 1
                    break
                else:
                    buf.append(c)
                    i += 1
            tokens.append(_Token("".join(buf), start + 1, quoted=True))
        else:
            start = i
            while i < n and not _is_sep(line[i]):
                i += 1
            tokens.append(_Token(line[start:i], start + 1))
    return tokens


def _needs_quotes(text: str) -> bool:
    if text == "" or text == "?" or text[0] in "'\"%@":
        return True
    return any(c.isspace() or c in ",{}'\"\\%" for c in text)


def _quote(text: str) -> str:
    if not _needs_quotes(text):
        return text
    escaped = (
        text.replace("\\", "\\\\")
        .replace("'", "\\'")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )
    return f"'{escaped}'"


def format_number(x: float) -> str:
    """Shortest text that parses back to exactly ``x``; integral values lose ``.0``."""
    text = repr(float(x))
    if text.endswith(".0"):
        text = text[:-2]
    return text


# --------------------------------------------------------------------------
# Parsing


def _parse_attribute(tokens: list[_Token], lineno: int) -> AttributeSpec:
    if len(tokens) < 3:
        col = tokens[-1].column if tokens else None
        raise ArffError("@attribute needs a name and a type", lineno, col)
    name_tok = tokens[1]
    if name_tok.text in ",{}" and not name_tok.quoted:
        raise ArffError("expected attribute name", lineno, name_tok.column)
    if not name_tok.text:
        raise ArffError("attribute name must be non-empty", lineno, name_tok.column)
    type_tok = tokens[2]
    if type_tok.text == "{" and not type_tok.quoted:
        labels = []
        expect_label = True
        closed = False
        for tok in tokens[3:]:
            if closed:
                raise ArffError("unexpected text after nominal label list", lineno, tok.column)
            if not tok.quoted and tok.text == "}":
                if expect_label and labels:
                    raise ArffError("empty label in nominal list", lineno, tok.column)
                closed = True
            elif not tok.quoted and tok.text == ",":
                if expect_label:
                    raise ArffError("empty label in nominal list", lineno, tok.column)
                expect_label = True
            elif not tok.quoted and tok.text == "{":
                raise ArffError("unexpected '{' in nominal list", lineno, tok.column)
            else:
                if not expect_label:
                    raise ArffError("expected ',' between nominal labels", lineno, tok.column)
                if tok.text in labels:
                    raise ArffError(f"duplicate nominal label {tok.text!r}", lineno, tok.column)
                labels.append(tok.text)
                expect_label = False
        if not closed:
            raise ArffError("unterminated nominal label list", lineno, type_tok.column)
        if not labels:
            raise ArffError("nominal attribute has no labels", lineno, type_tok.column)
        return AttributeSpec(name_tok.text, tuple(labels))
    kind = type_tok.text.lower()
    if type_tok.quoted or kind not in _NUMERIC_TYPES:
        if kind in _UNSUPPORTED_TYPES:
            raise ArffError(f"unsupported attribute type {type_tok.text!r}", lineno, type_tok.column)
        raise ArffError(f"unknown attribute type {type_tok.text!r}", lineno, type_tok.column)
    if len(tokens) > 3:
        raise ArffError("unexpected text after attribute type", lineno, tokens[3].column)
    return AttributeSpec(name_tok.text)


def _parse_row(tokens, lineno, attributes, label_maps) -> list[float]:
    if tokens and tokens[0].text == "{" and not tokens[0].quoted:
        raise ArffError("sparse ARFF rows are not supported", lineno, tokens[0].column)
    cells: list[_Token | None] = []
    expect_value = True
    for tok in tokens:
        if not tok.quoted and tok.text == ",":
            if expect_value:
                raise ArffError("empty value", lineno, tok.column)
            expect_value = True
        elif not tok.quoted and tok.text in "{}":
            raise ArffError(f"unexpected {tok.text!r} in data row", lineno, tok.column)
        else:
            if not expect_value:
                raise ArffError("expected ',' between values", lineno, tok.column)
            cells.append(tok)
            expect_value = False
    if expect_value:
        col = tokens[-1].column if tokens else 1
        raise ArffError("row ends with a separator", lineno, col)
    if len(cells) != len(attributes):
        raise ArffError(
            f"row has {len(cells)} values but {len(attributes)} attributes are declared",
            lineno,
            cells[0].column,
        )
    row = []
    for tok, attr, labels in zip(cells, attributes, label_maps):
        if tok.text == "?" and not tok.quoted:
            row.append(math.nan)
        elif labels is not None:
            idx = labels.get(tok.text)
            if idx is None:
                raise ArffError(
                    f"undeclared label {tok.text!r} for attribute {attr.name!r}", lineno, tok.column
                )
            row.append(float(idx))
        else:
            if not _NUMBER_RE.match(tok.text):
                raise ArffError(
                    f"invalid number {tok.text!r} for attribute {attr.name!r}", lineno, tok.column
                )
            value = float(tok.text)
            if math.isinf(value):
                raise ArffError(f"number out of range {tok.text!r}", lineno, tok.column)
            row.append(value)
    return row


def parse_arff(source: str | TextIO) -> Dataset:
    """Parse ARFF text (a string or a text stream) into a :class:`Dataset`."""
    text = source if isinstance(source, str) else source.read()
    relation = None
    attributes: list[AttributeSpec] = []
    names: set[str] = set()
    rows: list[list[float]] = []
    label_maps = None
    in_data = False
    lineno = 0
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        tokens = _tokenize(line, lineno)
        if in_data:
            rows.append(_parse_row(tokens, lineno, attributes, label_maps))
            continue
        head = tokens[0]
        keyword = head.text.lower() if not head.quoted else ""
        if keyword == "@relation":
            if relation is not None:
                raise ArffError("duplicate @relation", lineno, head.column)
            if len(tokens) != 2 or (not tokens[1].quoted and tokens[1].text in ",{}"):
                raise ArffError("@relation needs exactly one name", lineno, head.column)
            relation = tokens[1].text
        elif keyword == "@attribute":
            if relation is None:
                raise ArffError("@attribute before @relation", lineno, head.column)
            attr = _parse_attribute(tokens, lineno)
            if attr.name in names:
                raise ArffError(f"duplicate attribute name {attr.name!r}", lineno, tokens[1].column)
            names.add(attr.name)
            attributes.append(attr)
        elif keyword == "@data":
            if relation is None:
                raise ArffError("@data before @relation", lineno, head.column)
            if not attributes:
                raise ArffError("@data before any @attribute", lineno, head.column)
            if len(tokens) > 1:
                raise ArffError("unexpected text after @data", lineno, tokens[1].column)
            in_data = True
            label_maps = [
                None if a.labels is None else {lab: i for i, lab in enumerate(a.labels)}
                for a in attributes
            ]
        else:
            raise ArffError(f"unexpected {head.text!r} in header", lineno, head.column)
    if not in_data:
        raise ArffError("missing @data section", lineno)
    values = np.array(rows, dtype=float).reshape(len(rows), len(attributes))
    return Dataset(relation, attributes, values)


def read_arff(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_arff(fh)


# --------------------------------------------------------------------------
# Writing


def write_arff(d: Dataset) -> str:
    """Serialise ``d``; ``parse_arff(write_arff(d)) == d`` for every dataset."""
    out = io.StringIO()
    out.write(f"@relation {_quote(d.relation)}\n\n")
    for attr in d.attributes:
        if attr.is_nominal:
            kind = "{" + ",".join(_quote(lab) for lab in attr.labels) + "}"
        else:
            kind = "numeric"
        out.write(f"@attribute {_quote(attr.name)} {kind}\n")
    out.write("\n@data\n")
    quoted = [None if a.labels is None else [_quote(lab) for lab in a.labels] for a in d.attributes]
    for row in d.values:
        cells = []
        for v, labels in zip(row, quoted):
            if math.isnan(v):
                cells.append("?")
            elif labels is not None:
                cells.append(labels[int(v)])
            else:
                cells.append(format_number(v))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


# --------------------------------------------------------------------------
# Summaries


@dataclass(frozen=True)
class ColumnStats:
    name: str
    kind: str
    count: int
    missing: int
    distinct: int
    unique: int
    mean: float | None = None
    minimum: float | None = None
    maximum: float | None = None
    stddev: float | None = None
    label_counts: tuple[tuple[str, int], ...] | None = None


def column_stats(d: Dataset, attr: int | str) -> ColumnStats:
    """Count, missing, distinct/unique value counts and per-kind summaries of a column."""
    j = d.attribute_index(attr)
    spec = d.attributes[j]
    col = d.values[:, j]
    known = col[~np.isnan(col)]
    _, freq = np.unique(known, return_counts=True)
    stats = dict(
        name=spec.name,
        kind=spec.kind,
        count=int(col.size),
        missing=int(col.size - known.size),
        distinct=int(freq.size),
        unique=int(np.count_nonzero(freq == 1)),
    )
    if spec.is_nominal:
        counts = np.bincount(known.astype(int), minlength=len(spec.labels))
        stats["label_counts"] = tuple((lab, int(c)) for lab, c in zip(spec.labels, counts))
    elif known.size:
        stats.update(
            mean=float(known.mean()),
            minimum=float(known.min()),
            maximum=float(known.max()),
            stddev=float(known.std(ddof=1)) if known.size > 1 else 0.0,
        )
    return ColumnStats(**stats)
