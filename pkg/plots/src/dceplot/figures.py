"""Figure construction from the simulator's CSV schemas.

Three figure kinds:

- ``mse_vs_iteration``: one dB learning curve per algorithm from
  mse_curve.csv (columns: algorithm, iteration, mse_db, runs_aggregated).
- ``mse_vs_iteration_phi_opt``: the same file filtered to the fixed-matrix
  and matrix-optimizing compressed schemes.
- ``mse_vs_dimension``: final MSE against the reduced dimension from
  sweep.csv (columns: algorithm, d, s, bits, final_mse_db), one line per
  bits level, with the sparsity level annotated under each dimension.
"""

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

KINDS = ("mse_vs_iteration", "mse_vs_iteration_phi_opt", "mse_vs_dimension")

# canonical algorithm names in the simulator's CSV output
FIXED_COMPRESSED = "DCE"
OPTIMIZED_COMPRESSED = "DCE_phi_opt"

CURVE_COLUMNS = ("algorithm", "iteration", "mse_db")
SWEEP_COLUMNS = ("algorithm", "d", "s", "bits", "final_mse_db")


class SchemaError(ValueError):
    """The input CSV does not match the expected schema."""


class EmptyDataError(SchemaError):
    """The input CSV carries no usable data rows."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_path: str
    output_path: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {KINDS}")


def _read_rows(path, required):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        have = reader.fieldnames or []
        missing = [c for c in required if c not in have]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing} "
                              f"(found {have})")
        rows = list(reader)
    if not rows:
        raise EmptyDataError(f"{path}: no data rows")
    return rows


def _curve_series(rows, keep=None):
    series = {}
    for row in rows:
        name = row["algorithm"]
        if keep is not None and name not in keep:
            continue
        series.setdefault(name, []).append(
            (int(row["iteration"]), float(row["mse_db"])))
    for name in series:
        series[name].sort(key=lambda t: t[0])
    return series


def build_figure(spec):
    """Build (but do not save) the matplotlib figure for a spec."""
    if spec.kind in ("mse_vs_iteration", "mse_vs_iteration_phi_opt"):
        rows = _read_rows(spec.input_path, CURVE_COLUMNS)
        keep = None
        if spec.kind == "mse_vs_iteration_phi_opt":
            keep = (FIXED_COMPRESSED, OPTIMIZED_COMPRESSED)
        series = _curve_series(rows, keep)
        if not series:
            raise EmptyDataError(
                f"{spec.input_path}: no rows for algorithms {keep}")
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for name, points in series.items():
            its = [p[0] for p in points]
            vals = [p[1] for p in points]
            ax.plot(its, vals, label=name, linewidth=1.2)
        ax.set_xlabel("iteration")
        ax.set_ylabel("MSE (dB)")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        return fig

    rows = _read_rows(spec.input_path, SWEEP_COLUMNS)
    lines = {}
    annot = {}
    for row in rows:
        key = (row["algorithm"], int(row["bits"]))
        d, s = int(row["d"]), int(row["s"])
        lines.setdefault(key, []).append((d, float(row["final_mse_db"])))
        annot[d] = s
    fig, ax = plt.subplots(figsize=(7, 4.5))
    single_algo = len({a for a, _ in lines}) == 1
    for (algo, bits), points in sorted(lines.items()):
        points.sort(key=lambda t: t[0])
        label = f"{bits}-bit" if single_algo else f"{algo}, {bits}-bit"
        ax.plot([p[0] for p in points], [p[1] for p in points],
                marker="o", label=label)
    dims = sorted(annot)
    ax.set_xticks(dims)
    ax.set_xticklabels([f"{d}\nS={annot[d]}" for d in dims])
    ax.set_xlabel("reduced dimension D (with sparsity level S)")
    ax.set_ylabel("final MSE (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def render(spec):
    """Render the figure to spec.output_path (format from the extension)."""
    fig = build_figure(spec)
    try:
        fig.savefig(spec.output_path)
    finally:
        plt.close(fig)
    return spec.output_path
