"""
Readers and writers for the hcf-lab/1 artifact formats.

Algebras and metrics are stored as JSON documents tagged with
"format": "hcf-lab/1". Algebras list only the i < j structure constants;
the reader antisymmetrizes. Metrics store row-major [re, im] pairs.
Flow traces are written as CSV (t, state components, derived scalars)
with a JSON sidecar that holds events, column layout and run metadata.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from .algebra_core import ComplexLieAlgebra, HermitianMetric
from .constants import FORMAT_TAG
from .curvature import SolitonCertificate, Verdict
from .exceptions import FileFormatError, HcfLabError, ValidationError
from .flow import FlowEvent, FlowTrace
from .validators import ParameterValidator

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SIDECAR_SUFFIX = ".events.json"


def _read_document(path: PathLike, expected_kind: Optional[str] = None) -> Dict[str, Any]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FileFormatError(f"File not found: {path}", path=str(path), reason="missing")
    except (OSError, json.JSONDecodeError) as e:
        raise FileFormatError(f"Cannot read {path}: {e}", path=str(path), reason="unreadable")

    if not isinstance(payload, dict):
        raise FileFormatError("Top-level JSON value must be an object", path=str(path), reason="not an object")
    if payload.get("format") != FORMAT_TAG:
        raise FileFormatError(
            f"Unsupported format tag {payload.get('format')!r}, expected {FORMAT_TAG!r}",
            path=str(path),
            reason="format tag"
        )
    if expected_kind is not None and payload.get("kind", expected_kind) != expected_kind:
        raise FileFormatError(
            f"Expected a {expected_kind} document, got {payload.get('kind')!r}",
            path=str(path),
            reason="kind"
        )
    return payload


def _require_fields(payload: Dict[str, Any], fields: List[str], what: str, path: Optional[str]) -> None:
    try:
        ParameterValidator.validate_required_fields(payload, fields)
    except ValidationError as e:
        raise FileFormatError(f"Malformed {what}: {e.message}", path=path, reason="fields")


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(payload: Dict[str, Any]) -> str:
    """Deterministic JSON text (sorted keys, numpy scalars unwrapped)."""
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default)


def write_json(payload: Dict[str, Any], path: PathLike) -> Path:
    """Write a tagged JSON document with sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"format": FORMAT_TAG}
    document.update(payload)
    path.write_text(dumps(document) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path


# ---------------------------------------------------------------------------
# Algebras and metrics
# ---------------------------------------------------------------------------

def algebra_to_dict(alg: ComplexLieAlgebra) -> Dict[str, Any]:
    """Sparse i < j listing of the structure constants."""
    constants = []
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            for k in np.flatnonzero(alg.c[:, i, j]):
                value = complex(alg.c[k, i, j])
                constants.append({"i": i, "j": j, "k": int(k), "re": value.real, "im": value.imag})
    return {"kind": "algebra", "dim": alg.dim, "labels": list(alg.labels), "constants": constants}


def algebra_from_dict(payload: Dict[str, Any], path: Optional[str] = None) -> ComplexLieAlgebra:
    """
    Rebuild an algebra from its sparse listing.

    Raises:
        FileFormatError: If fields are missing or malformed
    """
    _require_fields(payload, ["dim", "constants"], "algebra document", path)
    try:
        dim = int(payload["dim"])
        entries = [
            (int(e["i"]), int(e["j"]), int(e["k"]), complex(float(e["re"]), float(e.get("im", 0.0))))
            for e in payload["constants"]
        ]
        labels = payload.get("labels") or None
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"Malformed algebra document: {e}", path=path, reason="fields")
    try:
        return ComplexLieAlgebra.from_sparse(dim, entries, labels)
    except HcfLabError as e:
        raise FileFormatError(f"Invalid algebra data: {e.message}", path=path, reason=e.error_code)


def metric_to_dict(g: HermitianMetric) -> Dict[str, Any]:
    entries = [[float(z.real), float(z.imag)] for z in np.asarray(g.H).ravel()]
    return {"kind": "metric", "dim": g.dim, "entries": entries}


def metric_from_dict(payload: Dict[str, Any], path: Optional[str] = None) -> HermitianMetric:
    """
    Rebuild a metric from row-major [re, im] pairs.

    Raises:
        FileFormatError: If fields are missing or the entry count is wrong
    """
    _require_fields(payload, ["dim", "entries"], "metric document", path)
    try:
        dim = int(payload["dim"])
        values = [complex(float(re), float(im)) for re, im in payload["entries"]]
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"Malformed metric document: {e}", path=path, reason="fields")
    if len(values) != dim * dim:
        raise FileFormatError(
            f"Metric has {len(values)} entries, expected {dim * dim}",
            path=path,
            reason="entry count"
        )
    return HermitianMetric(np.array(values, dtype=complex).reshape(dim, dim))


def write_algebra(alg: ComplexLieAlgebra, path: PathLike) -> Path:
    return write_json(algebra_to_dict(alg), path)


def read_algebra(path: PathLike) -> ComplexLieAlgebra:
    """Read an algebra file; the result is not Jacobi-verified."""
    return algebra_from_dict(_read_document(path, "algebra"), str(path))


def write_metric(g: HermitianMetric, path: PathLike) -> Path:
    return write_json(metric_to_dict(g), path)


def read_metric(path: PathLike) -> HermitianMetric:
    return metric_from_dict(_read_document(path, "metric"), str(path))


def write_system(alg: ComplexLieAlgebra, g: HermitianMetric, path: PathLike, **metadata: Any) -> Path:
    """Write an algebra together with a metric in a single document."""
    payload = {"kind": "system", "algebra": algebra_to_dict(alg), "metric": metric_to_dict(g)}
    payload.update(metadata)
    return write_json(payload, path)


def read_system(path: PathLike) -> Dict[str, Any]:
    """
    Read an algebra+metric document.

    Returns:
        Dict[str, Any]: "algebra", "metric" and any extra metadata fields
    """
    payload = _read_document(path, "system")
    _require_fields(payload, ["algebra", "metric"], "system document, needs algebra and metric", str(path))
    result = {k: v for k, v in payload.items() if k not in ("algebra", "metric", "format", "kind")}
    result["algebra"] = algebra_from_dict(payload["algebra"], str(path))
    result["metric"] = metric_from_dict(payload["metric"], str(path))
    return result


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def write_certificate(cert: SolitonCertificate, path: PathLike, **metadata: Any) -> Path:
    payload = {"kind": "certificate", "certificate": cert.to_dict()}
    payload.update(metadata)
    return write_json(payload, path)


def certificate_from_dict(data: Dict[str, Any], path: Optional[str] = None) -> SolitonCertificate:
    _require_fields(
        data, ["verdict", "lambda", "D", "residual", "tol", "D_star_is_derivation"], "certificate", path
    )
    try:
        D = np.array([[complex(re, im) for re, im in row] for row in data["D"]], dtype=complex)
        return SolitonCertificate(
            verdict=Verdict(data["verdict"]),
            lambda_=float(data["lambda"]),
            D=D.reshape(len(data["D"]), -1) if len(data["D"]) else np.zeros((0, 0), dtype=complex),
            residual=float(data["residual"]),
            tol=float(data["tol"]),
            d_star_is_derivation=bool(data["D_star_is_derivation"]),
            d_star_residual=float(data.get("D_star_residual", 0.0)),
            der_dim=int(data.get("der_dim", 0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"Malformed certificate: {e}", path=path, reason="fields")


def read_certificate(path: PathLike) -> SolitonCertificate:
    payload = _read_document(path, "certificate")
    return certificate_from_dict(payload.get("certificate", {}), str(path))


# ---------------------------------------------------------------------------
# Flow traces
# ---------------------------------------------------------------------------

def sidecar_path(csv_path: PathLike) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + SIDECAR_SUFFIX)


def _state_columns(trace: FlowTrace, state_labels: Optional[Sequence[str]]) -> List[str]:
    first = trace.states[0]
    if first.ndim == 2:
        n = first.shape[0]
        return [f"H_{i}_{j}_{part}" for i in range(n) for j in range(n) for part in ("re", "im")]
    if state_labels is not None:
        if len(state_labels) != first.size:
            raise FileFormatError(
                f"{len(state_labels)} state labels for {first.size} components",
                reason="state labels"
            )
        return list(state_labels)
    return [f"s{i}" for i in range(first.size)]


def _state_row(state: np.ndarray) -> List[float]:
    if state.ndim == 2:
        row: List[float] = []
        for z in state.ravel():
            row.extend((float(z.real), float(z.imag)))
        return row
    return [float(v) for v in state]


def write_trace_csv(
    trace: FlowTrace,
    path: PathLike,
    state_labels: Optional[Sequence[str]] = None,
    **metadata: Any
) -> Path:
    """
    Write a trace as CSV plus an events sidecar next to it.

    Matrix states are flattened row-major with re/im interleaved.

    Raises:
        FileFormatError: If the trace is empty
    """
    path = Path(path)
    if not trace.times:
        raise FileFormatError("Cannot export an empty trace", path=str(path), reason="empty")
    path.parent.mkdir(parents=True, exist_ok=True)

    state_columns = _state_columns(trace, state_labels)
    derived_columns = sorted(trace.derived)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t"] + state_columns + derived_columns)
        for idx, (t, state) in enumerate(zip(trace.times, trace.states)):
            derived = [trace.derived[name][idx] for name in derived_columns]
            writer.writerow([repr(float(t))] + [repr(v) for v in _state_row(state)] + [repr(float(v)) for v in derived])

    sidecar = {
        "kind": "trace",
        "csv": path.name,
        "state_kind": "matrix" if trace.is_matrix else "reduced",
        "state_shape": list(trace.states[0].shape),
        "state_columns": state_columns,
        "derived_columns": derived_columns,
        "events": [event.to_dict() for event in trace.events],
    }
    sidecar.update(metadata)
    write_json(sidecar, sidecar_path(path))
    logger.info(f"Wrote trace with {len(trace)} samples to {path}")
    return path


def read_trace_csv(path: PathLike) -> FlowTrace:
    """
    Read a trace written by write_trace_csv, including its sidecar.

    Raises:
        FileFormatError: If the CSV or sidecar is missing or inconsistent
    """
    path = Path(path)
    meta = _read_document(sidecar_path(path), "trace")
    shape = tuple(int(s) for s in meta["state_shape"])
    state_columns = meta["state_columns"]
    derived_columns = meta["derived_columns"]
    is_matrix = meta["state_kind"] == "matrix"

    trace = FlowTrace()
    try:
        with path.open("r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            expected = ["t"] + state_columns + derived_columns
            if reader.fieldnames != expected:
                raise FileFormatError("CSV header does not match sidecar", path=str(path), reason="header")
            for row in reader:
                values = np.array([float(row[c]) for c in state_columns])
                if is_matrix:
                    state = (values[0::2] + 1j * values[1::2]).reshape(shape)
                else:
                    state = values.reshape(shape)
                trace.times.append(float(row["t"]))
                trace.states.append(state)
                for name in derived_columns:
                    trace.derived.setdefault(name, []).append(float(row[name]))
    except FileNotFoundError:
        raise FileFormatError(f"File not found: {path}", path=str(path), reason="missing")
    except (KeyError, ValueError) as e:
        raise FileFormatError(f"Malformed trace CSV: {e}", path=str(path), reason="rows")

    trace.events.extend(
        FlowEvent(e["kind"], float(e["time"]), e.get("t_est"), e.get("detail") or {})
        for e in meta.get("events", [])
    )
    return trace
