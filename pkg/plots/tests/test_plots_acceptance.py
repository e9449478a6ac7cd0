"""Acceptance: round-trip a CSV produced by the simulator CLI into an image,
and reject a mutated copy with the offending column named.

The simulator is exercised only through its command-line interface; nothing
from its package is imported here.
"""

import shutil
import subprocess
import sys

import pytest
import yaml

from regret_plots import PlotSpec, SchemaError, render_regret_curves

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@pytest.fixture(scope="module")
def harness_csv(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("roundtrip")
    config = tmp_path / "config.yaml"
    config.write_text(yaml.safe_dump({
        "algorithm": "bobw",
        "num_arms": 2,
        "horizon": 1000,
        "loss": {"kind": "stochastic", "means": [0.5, 0.7]},
        "delay": {"kind": "constant", "value": 50},
        "seeds": [0, 1, 2, 3, 4],
    }))
    out = tmp_path / "results.csv"
    exe = shutil.which("bobw")
    cmd = [exe] if exe else [sys.executable, "-m", "bobw_bandits.cli"]
    proc = subprocess.run(
        cmd + ["run", "--config", str(config), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out


def test_round_trip_renders_image(harness_csv, tmp_path, capsys):
    out = tmp_path / "curves.png"
    render_regret_curves(
        PlotSpec(inputs=(str(harness_csv),), output=str(out), logx=True)
    )
    ok = out.read_bytes()[:8] == PNG_MAGIC
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] plot_round_trip: "
              f"rendered {out.stat().st_size} byte png from simulator CSV")
    assert ok


def test_mutated_csv_rejected_naming_column(harness_csv, tmp_path, capsys):
    lines = harness_csv.read_text().splitlines()
    fields = lines[1].split(",")
    fields[5] = "not-a-number"  # regret column
    lines[1] = ",".join(fields)
    mutated = tmp_path / "mutated.csv"
    mutated.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaError, match="column 'regret'") as excinfo:
        render_regret_curves(
            PlotSpec(inputs=(str(mutated),), output=str(tmp_path / "f.png"))
        )
    with capsys.disabled():
        print(f"\n[PASS] plot_schema_rejection: {excinfo.value}")
