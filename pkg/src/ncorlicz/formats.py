"""Operator documents, Orlicz function specs, run configs and record CSVs."""
from __future__ import annotations

import csv
import json
import math
import numbers
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidOrliczFunction, IoError, SchemaError
from .families import KINDS, SequenceFamily
from .operators import AlgebraShape, BlockOperator, random_operator, spawn_rng
from .orlicz import ExpMinusOne, OrliczFunction, Power, PowerLog, Tabulated, from_dict


# -- operators -----------------------------------------------------------------------

def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    v = float(value)
    if not math.isfinite(v):
        raise SchemaError(path, "expected a finite number")
    return v


def parse_operator(document: Any) -> BlockOperator:
    """Decode ``{"blocks": [{"weight": w, "matrix": [[[re, im], ...], ...]}, ...]}``."""
    if not isinstance(document, dict):
        raise SchemaError("$", "expected an object")
    blocks = document.get("blocks")
    if not isinstance(blocks, list) or not blocks:
        raise SchemaError("$.blocks", "expected a non-empty list")
    shape, mats = [], []
    for i, blk in enumerate(blocks):
        bp = f"$.blocks[{i}]"
        if not isinstance(blk, dict):
            raise SchemaError(bp, "expected an object")
        if "weight" not in blk:
            raise SchemaError(f"{bp}.weight", "missing")
        w = _number(blk["weight"], f"{bp}.weight")
        if w <= 0:
            raise SchemaError(f"{bp}.weight", f"weight must be positive, got {w}")
        rows = blk.get("matrix")
        if not isinstance(rows, list) or not rows:
            raise SchemaError(f"{bp}.matrix", "expected a non-empty list of rows")
        n = len(rows)
        mat = np.empty((n, n), dtype=np.complex128)
        for r, row in enumerate(rows):
            rp = f"{bp}.matrix[{r}]"
            if not isinstance(row, list):
                raise SchemaError(rp, "expected a list of [re, im] pairs")
            if len(row) != n:
                raise SchemaError(rp, f"row has {len(row)} entries; a square {n}x{n} matrix is required")
            for c, entry in enumerate(row):
                ep = f"{rp}[{c}]"
                if not isinstance(entry, list) or len(entry) != 2:
                    raise SchemaError(ep, "expected an [re, im] pair")
                mat[r, c] = complex(_number(entry[0], f"{ep}[0]"), _number(entry[1], f"{ep}[1]"))
        shape.append((n, w))
        mats.append(mat)
    return BlockOperator(AlgebraShape(tuple(shape)), tuple(mats))


def serialize_operator(x: BlockOperator) -> dict:
    return {"blocks": [
        {"weight": float(c),
         "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in b]}
        for c, b in zip(x.shape.weights, x.blocks)
    ]}


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc


def load_operator(path) -> BlockOperator:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    return parse_operator(doc)


def save_operator(x: BlockOperator, path) -> None:
    _write_text(path, json.dumps(serialize_operator(x)) + "\n")


# -- Orlicz function specs ---------------------------------------------------------------

def _load_knots(path) -> Tabulated:
    text = _read_text(path)
    if Path(path).suffix.lower() == ".json":
        doc = json.loads(text)
        if isinstance(doc, list):
            return Tabulated.from_knots(doc)
        return from_dict(doc)
    rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].lstrip().startswith("#")]
    try:
        knots = [(float(a), float(b)) for a, b in rows]
    except ValueError:
        knots = [(float(a), float(b)) for a, b in rows[1:]]  # header line
    return Tabulated.from_knots(knots)


def parse_phi(spec: str) -> OrliczFunction:
    """``power:<p>[:scale]``, ``expm1``, ``powerlog:<p>`` or ``tab:<path>`` (CSV ``u,phi`` or JSON)."""
    head, _, rest = spec.strip().partition(":")
    try:
        if head == "power":
            parts = rest.split(":")
            if len(parts) not in (1, 2) or not parts[0]:
                raise ValueError
            return Power(float(parts[0]), float(parts[1]) if len(parts) == 2 else 1.0)
        if head == "expm1" and not rest:
            return ExpMinusOne()
        if head == "powerlog":
            return PowerLog(float(rest))
        if head == "tab" and rest:
            return _load_knots(rest)
    except ValueError as exc:
        if isinstance(exc, InvalidOrliczFunction):
            raise
        raise InvalidOrliczFunction(f"malformed Orlicz function spec {spec!r}") from exc
    raise InvalidOrliczFunction(f"unknown Orlicz function spec {spec!r}")


# -- run configs ---------------------------------------------------------------------

@dataclass
class RunConfig:
    """One Kadec-Klee experiment: Orlicz function, base operator, family and tolerances.

    The base operator is read from ``base_file`` when set, otherwise drawn
    from ``base_ensemble`` on ``shape`` with ``seed``.
    """

    phi: str
    shape: list[list[float]] = field(default_factory=lambda: [[2, 1.0]])
    base_ensemble: str = "diagonal_uniform"
    base_file: str = ""
    family: str = "spike"
    family_params: dict[str, Any] = field(default_factory=dict)
    length: int = 64
    seed: int = 0
    eps: list[float] = field(default_factory=lambda: [0.1, 1.0])
    tol: float = 5e-2
    delta: float = 1e-2
    norm_tol: float = 1e-12
    output: str = "records.csv"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.phi, str):
            raise SchemaError("phi", "expected a spec string")
        if not self.phi.startswith("tab:"):  # tabulated files are read in build()
            try:
                parse_phi(self.phi)
            except InvalidOrliczFunction as exc:
                raise SchemaError("phi", str(exc)) from exc
        if self.family not in KINDS or self.family == "explicit":
            raise SchemaError("family", f"unsupported family {self.family!r}")
        if not isinstance(self.length, int) or self.length < 1:
            raise SchemaError("length", "must be a positive integer")
        for name in ("tol", "delta", "norm_tol"):
            if not getattr(self, name) > 0:
                raise SchemaError(name, "tolerances must be positive")
        if not self.eps or any(not e > 0 for e in self.eps):
            raise SchemaError("eps", "need at least one positive eps")
        if not self.base_file:
            if not self.shape:
                raise SchemaError("shape", "need at least one block")
            for i, blk in enumerate(self.shape):
                if len(blk) != 2 or int(blk[0]) != blk[0] or blk[0] < 1 or not blk[1] > 0:
                    raise SchemaError(f"shape[{i}]", "expected [dim, positive weight]")

    def to_toml(self) -> str:
        return tomli_w.dumps(asdict(self))

    @classmethod
    def from_toml(cls, text: str) -> "RunConfig":
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError("$", f"invalid TOML: {exc}") from exc
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(doc) - known)
        if unknown:
            raise SchemaError(unknown[0], "unknown key")
        if "phi" not in doc:
            raise SchemaError("phi", "missing")
        for key in ("tol", "delta", "norm_tol"):
            if key in doc:
                doc[key] = float(doc[key])
        if "eps" in doc:
            doc["eps"] = [float(e) for e in doc["eps"]]
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_toml(_read_text(path))

    def save(self, path) -> None:
        _write_text(path, self.to_toml())

    def build(self) -> tuple[OrliczFunction, SequenceFamily]:
        phi = parse_phi(self.phi)
        if self.base_file:
            base = load_operator(self.base_file)
        else:
            shape = AlgebraShape(tuple((int(d), float(w)) for d, w in self.shape))
            base = random_operator(shape, self.base_ensemble, spawn_rng(self.seed, 1))
        params = dict(self.family_params)
        if self.family == "vanishing":
            params.setdefault("source", base)
            base = BlockOperator.zeros(base.shape)
        return phi, SequenceFamily(self.family, base, self.length, self.seed, params)


# -- records -------------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (numbers.Integral,)):
        return str(int(v))
    if isinstance(v, numbers.Real):
        return format(float(v), ".17g")
    return str(v)


def _write_text(path, text: str) -> None:
    try:
        p = Path(path)
        if p.parent and not p.parent.exists():
            p.parent.mkdir(parents=True)
        with open(p, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    _write_text(path, "\n".join(lines) + "\n")


def record_header(n_eps: int) -> list[str]:
    return ["n", "luxemburg", "modular", "diff_norm", *[f"gauge_eps{i + 1}" for i in range(n_eps)], "verdict"]


def write_records(records, path, n_eps: int | None = None) -> None:
    """CSV of experiment records sorted by ``n``; floats with 17 significant digits."""
    records = sorted(records, key=lambda r: r.n)
    if n_eps is None:
        n_eps = len(records[0].gauges) if records else 1
    write_csv(path, record_header(n_eps), (r.row() for r in records))
