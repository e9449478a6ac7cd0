"""Strict reader for the experiment harness CSV schema.

The contract is the exact header ``algo,K,T,seed,checkpoint,regret,skips,
sigma_hat_max,cum_outstanding`` with one row per (seed, checkpoint). Any
deviation raises SchemaError naming the offending column, so a corrupted or
hand-edited file fails loudly instead of producing a silently wrong figure.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

EXPECTED_HEADER = [
    "algo",
    "K",
    "T",
    "seed",
    "checkpoint",
    "regret",
    "skips",
    "sigma_hat_max",
    "cum_outstanding",
]


class SchemaError(ValueError):
    """Raised when a CSV does not match the harness schema; the message
    always names the offending column."""


@dataclass(frozen=True)
class ResultTable:
    """Parsed contents of one harness CSV."""

    path: str
    algos: list[str]
    rows: list[dict]

    def checkpoints(self, algo: str) -> list[int]:
        return sorted({r["checkpoint"] for r in self.rows if r["algo"] == algo})

    def regrets_at(self, algo: str, checkpoint: int) -> np.ndarray:
        values = [
            r["regret"]
            for r in self.rows
            if r["algo"] == algo and r["checkpoint"] == checkpoint
        ]
        return np.asarray(values, dtype=float)


def _parse_int(raw: str, column: str, row_num: int, minimum: int) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise SchemaError(
            f"row {row_num}, column '{column}': expected integer, got {raw!r}"
        ) from None
    if value < minimum:
        raise SchemaError(
            f"row {row_num}, column '{column}': value {value} below minimum {minimum}"
        )
    return value


def _parse_float(raw: str, column: str, row_num: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise SchemaError(
            f"row {row_num}, column '{column}': expected real number, got {raw!r}"
        ) from None
    if not math.isfinite(value):
        raise SchemaError(f"row {row_num}, column '{column}': non-finite value")
    return value


def read_results(path) -> ResultTable:
    """Parse and validate one harness CSV."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file, missing header") from None
            if header != EXPECTED_HEADER:
                offending = _first_header_mismatch(header)
                raise SchemaError(f"{path}: bad header, column {offending}")
            rows = []
            for row_num, raw in enumerate(reader, start=2):
                if len(raw) != len(EXPECTED_HEADER):
                    raise SchemaError(
                        f"{path}: row {row_num} has {len(raw)} fields, "
                        f"expected {len(EXPECTED_HEADER)}"
                    )
                rows.append(_parse_row(raw, row_num))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None

    for row_num, row in enumerate(rows, start=2):
        if row["checkpoint"] > row["T"]:
            raise SchemaError(
                f"{path}: row {row_num}, column 'checkpoint': "
                f"{row['checkpoint']} exceeds horizon {row['T']}"
            )
    algos = sorted({r["algo"] for r in rows})
    return ResultTable(path=str(path), algos=algos, rows=rows)


def _first_header_mismatch(header: list[str]) -> str:
    for got, want in zip(header, EXPECTED_HEADER):
        if got != want:
            return f"'{got}' (expected '{want}')"
    if len(header) < len(EXPECTED_HEADER):
        return f"'{EXPECTED_HEADER[len(header)]}' (missing)"
    return f"'{header[len(EXPECTED_HEADER)]}' (unexpected extra)"


def _parse_row(raw: list[str], row_num: int) -> dict:
    algo = raw[0]
    if not algo:
        raise SchemaError(f"row {row_num}, column 'algo': empty")
    return {
        "algo": algo,
        "K": _parse_int(raw[1], "K", row_num, minimum=2),
        "T": _parse_int(raw[2], "T", row_num, minimum=1),
        "seed": _parse_int(raw[3], "seed", row_num, minimum=0),
        "checkpoint": _parse_int(raw[4], "checkpoint", row_num, minimum=1),
        "regret": _parse_float(raw[5], "regret", row_num),
        "skips": _parse_int(raw[6], "skips", row_num, minimum=0),
        "sigma_hat_max": _parse_int(raw[7], "sigma_hat_max", row_num, minimum=0),
        "cum_outstanding": _parse_int(raw[8], "cum_outstanding", row_num, minimum=0),
    }
