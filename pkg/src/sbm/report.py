"""Comparability reports and their JSON/CSV serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__


def _plain(value):
    """Convert numpy scalars/arrays into JSON-friendly python objects."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


@dataclass
class RatioReport:
    """Empirical comparability statistics for one two-sided estimate.

    Each sample is ``(x, y, lhs, rhs, ratio)`` where ``x``/``y`` are the
    sampled arguments (points, or scalars such as lambda or t; ``y`` may be
    None) and ``ratio = lhs / rhs``.
    """

    claim_id: str
    samples: list
    ratio_min: float
    ratio_max: float
    geometric_spread: float
    cap: float
    passed: bool
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, claim_id, xs, ys, lhs, rhs, cap, meta=None):
        lhs = np.asarray(lhs, dtype=float).ravel()
        rhs = np.asarray(rhs, dtype=float).ravel()
        n = lhs.size
        if ys is None:
            ys = [None] * n
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = lhs / rhs
        samples = [
            (_plain(x), _plain(y), float(a), float(b), float(r))
            for x, y, a, b, r in zip(xs, ys, lhs, rhs, ratio)
        ]
        return cls.from_samples(claim_id, samples, cap, meta)

    @classmethod
    def from_samples(cls, claim_id, samples, cap, meta=None):
        ratio = np.array([s[4] for s in samples], dtype=float)
        ok = ratio.size > 0 and bool(np.all(np.isfinite(ratio)) and np.all(ratio > 0))
        if ratio.size:
            rmin = float(np.min(ratio))
            rmax = float(np.max(ratio))
        else:
            rmin = rmax = math.nan
        if ok:
            spread = rmax / rmin
        else:
            spread = math.inf
        return cls(
            claim_id=claim_id,
            samples=list(samples),
            ratio_min=rmin,
            ratio_max=rmax,
            geometric_spread=spread,
            cap=float(cap),
            passed=bool(ok and spread <= cap),
            meta=dict(meta or {}),
        )

    @property
    def ratios(self):
        return np.array([s[4] for s in self.samples], dtype=float)

    def to_dict(self):
        return {
            "claim_id": self.claim_id,
            "ratio_min": self.ratio_min,
            "ratio_max": self.ratio_max,
            "geometric_spread": self.geometric_spread,
            "cap": self.cap,
            "pass": self.passed,
            "meta": _plain(self.meta),
            "samples": [
                {"x": s[0], "y": s[1], "lhs": s[2], "rhs": s[3], "ratio": s[4]}
                for s in self.samples
            ],
        }

    @classmethod
    def from_dict(cls, d):
        samples = [(s["x"], s["y"], s["lhs"], s["rhs"], s["ratio"]) for s in d["samples"]]
        return cls(
            claim_id=d["claim_id"],
            samples=samples,
            ratio_min=d["ratio_min"],
            ratio_max=d["ratio_max"],
            geometric_spread=d["geometric_spread"],
            cap=d["cap"],
            passed=d["pass"],
            meta=d.get("meta", {}),
        )

    def summary(self):
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"{flag} {self.claim_id}: n={len(self.samples)} "
            f"min={self.ratio_min:.4g} max={self.ratio_max:.4g} "
            f"spread={self.geometric_spread:.4g} (cap {self.cap:g})"
        )


def emit_report(reports, path, spec=None, domain=None):
    """Write ``reports`` to ``path`` (JSON) and a flat CSV next to it.

    The CSV has one row per sample with columns
    ``claim_id, x, y, lhs, rhs, ratio``; point coordinates are written as
    space-separated numbers.  Returns the pair of written paths.
    """
    path = Path(path)
    doc = {
        "toolkit_version": __version__,
        "spec": None if spec is None else str(spec),
        "domain": None if domain is None else str(domain),
        "claims": [r.to_dict() for r in reports],
    }
    # allow_nan keeps inf spreads of failed claims representable
    path.write_text(json.dumps(doc, indent=2))
    csv_path = path.with_suffix(".csv")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["claim_id", "x", "y", "lhs", "rhs", "ratio"])
        for r in reports:
            for x, y, lhs, rhs, ratio in r.samples:
                writer.writerow([r.claim_id, _cell(x), _cell(y), repr(lhs), repr(rhs), repr(ratio)])
    return path, csv_path


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return " ".join(repr(float(c)) for c in v)
    return repr(float(v))


def read_report(path):
    doc = json.loads(Path(path).read_text())
    doc["claims"] = [RatioReport.from_dict(c) for c in doc["claims"]]
    return doc
