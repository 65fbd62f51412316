"""
writers.py

Serialize CDF tables, verification reports and limit comparisons to CSV or
JSON text, and write that text atomically.

Output targets:
- "-"            -> stdout
- bare file name -> OUTPUT_DIR / name
- anything else  -> used as given

Serialization is deterministic: the same object always produces the same
bytes.
"""

import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd

from config.base import OUTPUT_DIR
from config.settings import CSV_FLOAT_FORMAT
from model.errors import ArgumentError
from model.fredholm import LimitComparison
from model.kernelmat import DistributionTable
from model.verify import VerificationReport

FORMATS = ("csv", "json")


# -------------------- TARGETS --------------------

def resolve_output(target: str) -> Optional[Path]:
    """
    Map an --output value to a file path.

    Args:
        target (str): "-", a bare file name, or a path

    Returns:
        Optional[Path]: None for stdout
    """
    if target == "-":
        return None
    path = Path(target)
    if path.name == "":
        raise ArgumentError(f"Output target is not a file: {target!r}")
    if path.parent == Path("."):
        return OUTPUT_DIR / path.name
    return path


def write_atomic(path: Path, text: str) -> None:
    """
    Write text to path via a temp file in the same directory and os.replace.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def emit(text: str, target: str) -> Optional[Path]:
    """
    Send serialized output to stdout or a file.

    Returns:
        Optional[Path]: File written, or None for stdout
    """
    path = resolve_output(target)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return None
    write_atomic(path, text)
    return path


# -------------------- CSV --------------------

def _frame_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def table_csv(table: DistributionTable) -> str:
    """Header ``arg,prob`` then one row per grid point."""
    return _frame_csv(table.to_frame())


def report_frame(report: VerificationReport) -> pd.DataFrame:
    rows = [c.to_dict() for c in report.checks]
    return pd.DataFrame(rows, columns=["name", "anchor", "max_err", "tol", "pass"])


def report_csv(report: VerificationReport) -> str:
    """Header ``name,anchor,max_err,tol,pass``; informational entries are JSON-only."""
    return _frame_csv(report_frame(report))


def limit_csv(comparison: LimitComparison) -> str:
    """
    One block per N:

        # N=8
        s,G_N,F_GOE,abs_err
        ...
    """
    blocks = []
    for N in comparison.N_list:
        G = comparison.G[N]
        frame = pd.DataFrame({
            "s": comparison.s_grid,
            "G_N": G,
            "F_GOE": comparison.limit,
            "abs_err": abs(G - comparison.limit),
        })
        blocks.append(f"# N={N}\n" + _frame_csv(frame))
    return "".join(blocks)


# -------------------- JSON --------------------

def _json_text(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def table_json(table: DistributionTable) -> str:
    return _json_text({
        "label": table.label,
        "rows": [{"arg": float(a), "prob": float(p)} for a, p in table.points],
    })


def report_json(report: VerificationReport) -> str:
    return _json_text(report.to_dict())


def limit_json(comparison: LimitComparison) -> str:
    blocks = []
    for N in comparison.N_list:
        blocks.append({
            "N": int(N),
            "G_N": [float(x) for x in comparison.G[N]],
            "abs_err": [float(x) for x in abs(comparison.G[N] - comparison.limit)],
            "sup_err": float(comparison.errors[N]),
            "loe_soft_edge": [float(x) for x in comparison.loe_scaled[N]],
            "loe_sup_err": float(comparison.loe_errors[N]),
            "matched_diff": float(comparison.matched_diff[N]),
        })
    return _json_text({
        "suite": "tw-limit",
        "s": [float(x) for x in comparison.s_grid],
        "F_GOE": [float(x) for x in comparison.limit],
        "F_GOE_loe": [float(x) for x in comparison.loe_limit],
        "blocks": blocks,
    })


# -------------------- DISPATCH --------------------

def serialize(obj: Any, fmt: str) -> str:
    """
    Serialize a table, report or limit comparison.

    Args:
        obj: DistributionTable | VerificationReport | LimitComparison
        fmt (str): csv | json

    Returns:
        str: Serialized text ending in a newline
    """
    if fmt not in FORMATS:
        raise ArgumentError(f"Unknown output format: {fmt}")

    if isinstance(obj, DistributionTable):
        return table_csv(obj) if fmt == "csv" else table_json(obj)
    if isinstance(obj, VerificationReport):
        return report_csv(obj) if fmt == "csv" else report_json(obj)
    if isinstance(obj, LimitComparison):
        return limit_csv(obj) if fmt == "csv" else limit_json(obj)
    raise ArgumentError(f"Cannot serialize {type(obj).__name__}")
