"""Deterministic JSON reports.

Reports echo enough configuration (seed, test spec, input digest) to
re-run the exact invocation. Identical inputs and seed produce
byte-identical JSON, except for the creation timestamp; set
SOURCE_DATE_EPOCH (the reproducible-builds convention) to pin it.
"""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version

SCHEMA_VERSION = 1


def tool_version() -> str:
    try:
        return version("esbacktest")
    except PackageNotFoundError:
        return "unknown"


def created_utc() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        dt = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        dt = datetime.now(tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def header(seed: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "generator": {"name": "esbacktest", "version": tool_version()},
        "created_utc": created_utc(),
        "seed": seed,
    }


def spec_echo(spec) -> dict:
    return {
        "preset": spec.preset or "custom",
        "K": spec.K,
        "Kprime": spec.Kprime,
        "families": [f.value for f in spec.families],
        "conditions": spec.n_conditions,
    }


def moment_entries(mv) -> list:
    return [
        {"family": c.family.value, "k": c.k, "j": c.j,
         "mean": float(mean), "m": int(m)}
        for c, mean, m in mv.entries()
    ]


def outcome_entry(outcome, level: float = 0.05) -> dict:
    out = {
        "statistic": outcome.statistic,
        "df": outcome.df,
        "p_asymptotic": outcome.p_asymptotic,
        "p_mc": outcome.p_mc,
        "mc_reps": outcome.mc_reps,
    }
    p = outcome.p_mc if outcome.p_mc is not None else outcome.p_asymptotic
    out["reject"] = bool(p <= level)
    out["level"] = level
    return out


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"
