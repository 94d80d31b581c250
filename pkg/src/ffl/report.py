"""Suite configuration, report records, and their JSON/CSV serialization."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Any

from .errors import ConfigInvalid

SUITES = ("polar", "remark2", "dimension", "quasitrace", "lemma4", "lemma5", "theorem6", "corollaries", "star")
FORMATS = ("json", "csv")
CSV_HEADER = ("trial", "property", "residual", "pass")


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "all"
    n_list: tuple[int, ...] = (4,)
    trials: int = 10
    seed: int = 0
    tol: float | None = None
    cond_bound: float | None = None
    report_path: str | None = None
    format: str = "json"
    input_path: str | None = None
    replay_seed: int | None = None

    def validate(self) -> "SuiteConfig":
        if self.suite not in SUITES + ("all",):
            raise ConfigInvalid(f"unknown suite {self.suite!r}")
        if self.format not in FORMATS:
            raise ConfigInvalid(f"unknown format {self.format!r}")
        if self.trials < 1:
            raise ConfigInvalid("trials must be >= 1")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ConfigInvalid("every n must be >= 1")
        if self.suite == "lemma5" and any(n % 2 for n in self.n_list):
            raise ConfigInvalid("suite lemma5 needs even n")
        if self.tol is not None and not self.tol > 0:
            raise ConfigInvalid("tol must be positive")
        if self.cond_bound is not None and not self.cond_bound >= 1:
            raise ConfigInvalid("cond_bound must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        return self

    def suites(self) -> tuple[str, ...]:
        return SUITES if self.suite == "all" else (self.suite,)

    def echo(self) -> dict[str, Any]:
        d = asdict(self)
        d["n_list"] = list(self.n_list)
        return d


@dataclass
class SuiteReport:
    config: dict[str, Any]
    records: list[dict[str, Any]] = field(default_factory=list)
    aggregate: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.records)

    def finalize(self, wall_time_ms: float) -> "SuiteReport":
        residuals = [r["residual"] for r in self.records if r["residual"] is not None]
        passes = sum(1 for r in self.records if r["pass"])
        self.aggregate = {
            "max_residual": max(residuals) if residuals else 0.0,
            "pass_count": passes,
            "fail_count": len(self.records) - passes,
            "record_count": len(self.records),
            "wall_time_ms": round(wall_time_ms, 3),
        }
        return self

    def without_timing(self) -> dict[str, Any]:
        agg = {k: v for k, v in self.aggregate.items() if k != "wall_time_ms"}
        return {"config": self.config, "records": self.records, "aggregate": agg}


def make_record(suite: str, n: int, trial: int, seed: int, prop: str, residual: float | None,
                tol: float, error: str | None = None) -> dict[str, Any]:
    ok = residual is not None and residual <= tol
    rec = {
        "suite": suite,
        "n": n,
        "trial": trial,
        "seed": seed,
        "property": prop,
        "residual": None if residual is None else float(residual),
        "tol": float(tol),
        "pass": bool(ok),
    }
    if error is not None:
        rec["error"] = error
    return rec


def emit_report(report: SuiteReport, fmt: str = "json") -> bytes:
    """Serialize a report; output is byte-stable for a fixed report."""
    if fmt == "json":
        payload = {"config": report.config, "records": report.records, "aggregate": report.aggregate}
        return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in report.records:
            residual = "" if r["residual"] is None else repr(r["residual"])
            w.writerow([r["trial"], f"{r['suite']}.{r['property']}", residual, "true" if r["pass"] else "false"])
        return buf.getvalue().encode("utf-8")
    raise ConfigInvalid(f"unknown format {fmt!r}")


def parse_report(data: bytes, fmt: str = "json") -> SuiteReport:
    """Inverse of ``emit_report``; CSV yields records only."""
    text = data.decode("utf-8")
    if fmt == "json":
        obj = json.loads(text)
        return SuiteReport(obj["config"], obj["records"], obj["aggregate"])
    if fmt == "csv":
        rows = list(csv.DictReader(io.StringIO(text)))
        records = []
        for row in rows:
            suite, _, prop = row["property"].partition(".")
            records.append({
                "trial": int(row["trial"]),
                "suite": suite,
                "property": prop,
                "residual": float(row["residual"]) if row["residual"] else None,
                "pass": row["pass"] == "true",
            })
        return SuiteReport({}, records, {})
    raise ConfigInvalid(f"unknown format {fmt!r}")
