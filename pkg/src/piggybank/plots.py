"""Figure rendering for the report commands.

Each report command writes its figure next to the delimited output.  CSV
remains the machine contract; these are the human view of the same rows.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .game import COLS, ROWS, GameMatrixResult, Verdict
from .sweeps import M_NOT_FOUND, BenchRow, SweepRow

_VERDICT_COLORS = {
    Verdict.SAFE: "#7fbf7f",
    Verdict.SAFE_DETECTED: "#f0c060",
    Verdict.UNSAFE: "#e06060",
}


def render_sweep_figure(rows: list[SweepRow], path: str) -> None:
    """required_m versus n_cover, log2 on the photon axis."""
    found = [r for r in rows if r.required_m != M_NOT_FOUND]
    missing = [r for r in rows if r.required_m == M_NOT_FOUND]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if found:
        ax.plot(
            [r.n_cover for r in found],
            [r.required_m for r in found],
            marker="o",
            drawstyle="steps-post",
            label="required m",
        )
    if missing:
        ax.plot(
            [r.n_cover for r in missing],
            [1 for _ in missing],
            marker="x",
            linestyle="none",
            color="crimson",
            label="target unreachable",
        )
    ax.set_xscale("log", base=2)
    ax.set_xlabel("cover photons n")
    ax.set_ylabel("required message redundancy m")
    ax.set_title("Message redundancy needed vs cover budget")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_bench_figure(rows: list[BenchRow], path: str) -> None:
    """Two panels: snap success vs photons, and RMSE on log-log axes."""
    grids = sorted({r.grid_size for r in rows})
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    for g in grids:
        sub = sorted((r for r in rows if r.grid_size == g), key=lambda r: r.photons)
        xs = [r.photons for r in sub]
        ax1.plot(xs, [r.success_rate for r in sub], marker="o", label=f"grid {g}")
        ax2.plot(xs, [r.rmse for r in sub], marker="o", label=f"grid {g}")
    ax1.set_xscale("log", base=2)
    ax1.set_xlabel("photons")
    ax1.set_ylabel("snap success rate")
    ax1.set_title("Grid recovery")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    ax2.set_xscale("log", base=2)
    ax2.set_yscale("log")
    ax2.set_xlabel("photons")
    ax2.set_ylabel("estimate RMSE (rad)")
    ax2.set_title("Estimator error, c^(-1/2) trend")
    ax2.grid(True, alpha=0.3, which="both")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_game_figure(result: GameMatrixResult, path: str) -> None:
    """The 2x2 verdict matrix as a colored table."""
    fig, ax = plt.subplots(figsize=(8.0, 4.2))
    ax.set_xlim(0, 2)
    ax.set_ylim(0, 2)
    col_titles = {"SIPHON_FEW": "Eve siphons few", "SIPHON_MANY": "Eve siphons many"}
    row_titles = {"LOW_NM": "low n, m", "HIGH_NM": "high n, m"}
    for i, row in enumerate(ROWS):
        for j, col in enumerate(COLS):
            cell = result.cell(row, col)
            y = 1 - i  # first row on top
            ax.add_patch(
                plt.Rectangle((j, y), 1, 1, color=_VERDICT_COLORS[cell.verdict], alpha=0.85)
            )
            acc = (
                f"\neve acc {cell.eve_bit_accuracy:.2f}"
                if cell.eve_bit_accuracy is not None
                else ""
            )
            ax.text(
                j + 0.5,
                y + 0.5,
                f"{cell.verdict.value}\nphotons {cell.total_photons:.0f} / thr {cell.threshold}{acc}",
                ha="center",
                va="center",
                fontsize=9,
            )
    ax.set_xticks([0.5, 1.5])
    ax.set_xticklabels([col_titles[c] for c in COLS])
    ax.set_yticks([0.5, 1.5])
    ax.set_yticklabels([row_titles[r] for r in reversed(ROWS)])
    ax.set_title("Strategy matrix verdicts")
    ax.tick_params(length=0)
    for spine in ax.spines.values():
        spine.set_visible(False)
    fig.text(0.5, 0.01, result.note, ha="center", fontsize=7, style="italic", wrap=True)
    fig.tight_layout(rect=(0, 0.05, 1, 1))
    fig.savefig(path, dpi=120)
    plt.close(fig)
