"""Dataset CSV files, JSON reports and certificate files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .auditor import AuditReport, StepRecord
from .core import Dataset, Halfspace
from .metrics import EstimateWithCI, FairnessMeasurement

REPORT_VERSION = 1
CERT_VERSION = 1


class DatasetFormatError(ValueError):
    pass


class ReportFormatError(ValueError):
    pass


def atomic_write(path, data: str) -> None:
    """Write text via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------- datasets

def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    buf.write(",".join([f"f{j + 1}" for j in range(data.d)] + ["label"]) + "\n")
    for row, label in zip(data.features.tolist(), data.labels.tolist()):
        buf.write(",".join(map(repr, row)))
        buf.write(f",{label}\n")
    return buf.getvalue()


def dataset_from_csv(text: str, meta=None) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetFormatError("empty dataset file") from None
    d = len(header) - 1
    if d < 1 or header[-1] != "label" or header[:-1] != [f"f{j + 1}" for j in range(d)]:
        raise DatasetFormatError("header must be 'f1,...,fd,label'")
    feats, labels = [], []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != d + 1:
            raise DatasetFormatError(f"line {lineno}: expected {d + 1} columns, got {len(row)}")
        try:
            x = [float(v) for v in row[:-1]]
            label = int(row[-1])
        except ValueError as exc:
            raise DatasetFormatError(f"line {lineno}: {exc}") from None
        if label not in (-1, 1):
            raise DatasetFormatError(f"line {lineno}: label must be -1 or 1")
        if not all(math.isfinite(v) for v in x):
            raise DatasetFormatError(f"line {lineno}: non-finite feature")
        feats.append(x)
        labels.append(label)
    if not feats:
        raise DatasetFormatError("dataset has no rows")
    return Dataset(np.array(feats), np.array(labels), meta or {})


def write_dataset(data: Dataset, path) -> None:
    atomic_write(path, dataset_to_csv(data))


def read_dataset(path) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return dataset_from_csv(fh.read(), {"source": str(path)})


# ------------------------------------------------------------------- JSON

def _float_text(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


class _Encoder(json.JSONEncoder):
    """Serializes every float with 17 significant digits."""

    def iterencode(self, o, _one_shot=False):
        return json.encoder._make_iterencode(
            {} if self.check_circular else None, self.default, json.encoder.encode_basestring,
            self.indent, _float_text, self.key_separator, self.item_separator,
            self.sort_keys, self.skipkeys, False,
        )(o, 0)

    def default(self, o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def dumps(obj) -> str:
    return json.dumps(obj, cls=_Encoder, indent=2, ensure_ascii=False) + "\n"


def halfspace_to_dict(h: Halfspace) -> dict:
    return {"normal": [float(v) for v in h.normal], "threshold": float(h.threshold)}


def halfspace_from_dict(obj) -> Halfspace:
    try:
        return Halfspace(np.array(obj["normal"], dtype=np.float64), float(obj["threshold"]))
    except (KeyError, TypeError) as exc:
        raise ReportFormatError(f"malformed halfspace: {exc}") from None


def estimate_to_dict(e: EstimateWithCI) -> dict:
    return {"point": e.point, "half_width": e.half_width, "confidence": e.confidence,
            "n_samples": e.n_samples}


def measurement_to_dict(m: FairnessMeasurement) -> dict:
    return {
        "mass": estimate_to_dict(m.mass),
        "pos_rate_global": estimate_to_dict(m.pos_rate_global),
        "pos_rate_group": estimate_to_dict(m.pos_rate_group),
        "deviation": m.deviation,
        "gamma": m.gamma,
        "ci": {"half_width": m.gamma_half_width, "confidence": m.confidence},
    }


def _trace_entry(rec: StepRecord) -> dict:
    m = rec.measurement
    h = rec.chosen.halfspace
    return {
        "mu": rec.mu,
        "side": rec.side,
        "direction": [float(v) for v in h.normal],
        "threshold": h.threshold,
        "mass_hat": None if m is None else m.mass.point,
        "deviation_hat": None if m is None else m.deviation,
        "gamma_hat": rec.gamma_hat,
        "ci": None if m is None else m.gamma_half_width,
        "train_disagreement": rec.chosen.train_disagreement,
    }


def report_to_dict(report: AuditReport, runtime_ms: float | None = None) -> dict:
    out = {
        "version": REPORT_VERSION,
        "config": report.config.to_dict(),
        "trace": [_trace_entry(r) for r in report.trace],
    }
    cert = report.published_certificate
    if cert is not None:
        out["certificate"] = halfspace_to_dict(cert)
    out.update({
        "gamma_hat": report.gamma_hat.point,
        "ci": {"half_width": report.gamma_hat.half_width,
               "confidence": report.gamma_hat.confidence,
               "n_samples": report.gamma_hat.n_samples},
        "verdict": report.verdict.value,
        "runtime_ms": runtime_ms,
        "seed": report.config.seed,
    })
    return out


def report_to_json(report: AuditReport, runtime_ms: float | None = None) -> str:
    return dumps(report_to_dict(report, runtime_ms))


def parse_report(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportFormatError(f"report is not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or obj.get("version") != REPORT_VERSION:
        raise ReportFormatError(f"unsupported report version {obj.get('version')!r}"
                                if isinstance(obj, dict) else "report must be a JSON object")
    return obj


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_report(fh.read())


def witnesses_to_json(witnesses) -> str:
    return dumps({"version": CERT_VERSION,
                  "witnesses": [halfspace_to_dict(h) for h in witnesses]})


def read_certificates(path) -> list[Halfspace]:
    """Halfspaces from a bare certificate, a witness sidecar, or an audit report."""
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ReportFormatError(f"certificate file is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ReportFormatError("certificate file must hold a JSON object")
    if "witnesses" in obj:
        return [halfspace_from_dict(w) for w in obj["witnesses"]]
    if "certificate" in obj:
        return [halfspace_from_dict(obj["certificate"])]
    if "normal" in obj:
        return [halfspace_from_dict(obj)]
    raise ReportFormatError("no certificate found (report without one is non-constructive or fair)")
