"""Result files: CSV tables, the run metadata sidecar, gnuplot scripts.

CSV: one header row, comma separated, ``\\n`` line ends, floats with 17
significant digits so every double round-trips exactly. Files are first
written as ``<name>.partial`` and renamed by :func:`finalize` once the
metadata sidecar is on disk.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path
from typing import Iterable, Sequence

SCHEMAS = {
    "growth.csv": ("encounter", "mean_n_a", "mean_n_b", "free_energy", "purity_a", "purity_b", "tail_mass"),
    "energy.csv": ("encounter", "energy_start", "energy_contact_end", "energy_after_product",
                   "interaction_energy", "delta_free", "delta_h", "delta_v"),
    "dist_final.csv": ("n", "p_a", "p_b"),
    "fits.csv": ("quantity", "slope", "intercept", "r_squared", "n_points"),
    "shorttime.csv": ("t", "direct", "series", "ratio"),
    "summary.csv": ("quantity", "value"),
    "classical.csv": ("toggle", "mean_logE", "var_logE", "mean_E", "ratio"),
}

METADATA_FILE = "metadata.json"
METADATA_KEYS = (
    "artifact", "version", "experiment", "config", "seed", "started_at", "finished_at",
    "status", "exit_code", "partial", "files", "truncation_warnings", "stability",
    "support_audit", "error",
)
PARTIAL_SUFFIX = ".partial"


def format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    if hasattr(value, "dtype"):
        return format_value(value.item())
    return str(value)


def write_csv(run_dir: Path, name: str, rows: Iterable[Sequence]) -> Path:
    """Write ``rows`` under the fixed header for ``name`` as a pending file."""
    header = SCHEMAS[name]
    path = Path(run_dir) / (name + PARTIAL_SUFFIX)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"{name}: row has {len(row)} fields, schema has {len(header)}")
            writer.writerow([format_value(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def pending(run_dir: Path) -> list[Path]:
    return sorted(Path(run_dir).glob("*" + PARTIAL_SUFFIX))


def write_metadata(run_dir: Path, metadata: dict) -> Path:
    missing = set(METADATA_KEYS) - set(metadata)
    extra = set(metadata) - set(METADATA_KEYS)
    if missing or extra:
        raise ValueError(f"metadata keys off-schema: missing={sorted(missing)} extra={sorted(extra)}")
    path = Path(run_dir) / METADATA_FILE
    if path.exists():
        raise FileExistsError(f"{path} already written for this run")
    ordered = {k: metadata[k] for k in METADATA_KEYS}
    path.write_text(json.dumps(ordered, indent=2, sort_keys=False, default=_json_default) + "\n",
                    encoding="utf-8")
    return path


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def finalize(run_dir: Path) -> list[str]:
    """Rename every pending result file to its final name."""
    names = []
    for path in pending(run_dir):
        final = path.with_name(path.name[: -len(PARTIAL_SUFFIX)])
        os.replace(path, final)
        names.append(final.name)
    return names


def clear_previous(run_dir: Path) -> None:
    """Remove result files a previous run left in ``run_dir``."""
    run_dir = Path(run_dir)
    for name in list(SCHEMAS) + [METADATA_FILE, "plot.gp"]:
        for candidate in (run_dir / name, run_dir / (name + PARTIAL_SUFFIX)):
            if candidate.exists():
                candidate.unlink()


# -- gnuplot -----------------------------------------------------------------

_QUANTUM_SCRIPT = """\
# Boson-number distributions and mean excitation per encounter.
# Render with: gnuplot plot.gp  (run inside this directory)
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1000,420
set output 'distributions.png'
set multiplot layout 1,2 title 'Boson-number distribution after the last encounter'
set logscale y
set format y '10^{%L}'
set xlabel 'n'
set ylabel 'P(n)'
set title 'rho_a'
plot 'dist_final.csv' using 1:2 with linespoints pt 7 title 'rho_a'
set title 'rho_b'
plot 'dist_final.csv' using 1:3 with linespoints pt 7 title 'rho_b'
unset multiplot
unset logscale y
set format y '%g'

set terminal pngcairo size 640,420
set output 'growth.png'
set title 'Average excitation per encounter'
set xlabel 'encounter'
set ylabel '<n>'
plot 'growth.csv' using 1:2 with points pt 6 ps 1.3 title 'A (<n_a>)', \\
     'growth.csv' using 1:3 with points pt 2 ps 1.3 title 'B (<n_b>)'
unset output
"""

_CLASSICAL_SCRIPT = """\
# Classical toggle ensemble: log-energy statistics per toggle.
# Render with: gnuplot plot.gp  (run inside this directory)
set datafile separator ','
set key autotitle columnhead left top
set terminal pngcairo size 1000,420
set output 'log_energy.png'
set multiplot layout 1,2
set xlabel 'toggle'
set title 'mean and variance of log E'
plot 'classical.csv' using 1:2 with lines lw 2 title '<log E>', \\
     'classical.csv' using 1:3 with lines lw 2 title 'var log E'
set title 'log <E> vs lognormal prediction'
plot 'classical.csv' using 1:(log($4)) with lines lw 2 title 'log <E>', \\
     'classical.csv' using 1:($2 + $3/2) with lines dt 2 title '<log E> + var/2'
unset multiplot
unset output
"""


def emit_plot_script(run_dir) -> Path:
    """Write ``plot.gp`` for the result files found in ``run_dir``."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"run directory {run_dir} does not exist")
    if (run_dir / "growth.csv").exists() and (run_dir / "dist_final.csv").exists():
        script = _QUANTUM_SCRIPT
    elif (run_dir / "classical.csv").exists():
        script = _CLASSICAL_SCRIPT
    else:
        raise FileNotFoundError(
            f"{run_dir} holds neither growth.csv + dist_final.csv nor classical.csv"
        )
    path = run_dir / "plot.gp"
    path.write_text(script, encoding="utf-8")
    return path
