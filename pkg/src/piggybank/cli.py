"""Command-line front end.

    piggybank <command> --config <path> [--seed N] [--out <path>]
                        [--format json|csv] [--no-plot]

Commands: classical, quantum, sweep-nm, game-matrix, tomography-bench.

Flag values override config-file values, which override defaults.  Every
output file embeds the seed, a hash of the config document, and the package
version; rerunning a command with the same config and seed reproduces the
primary output files byte for byte (figures are a rendering of the same rows,
not part of the replay contract).

Exit codes: 0 success, 1 config error, 2 protocol failure, 3 expected-pattern
mismatch.
"""

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, plots
from .adversary import AttackMode, AttackStrategy
from .classical import HashSpec, PiggyBankKeys, keygen, run_classical_session
from .errors import (
    ConfigError,
    ExponentNotCoprime,
    NonPrimeFactor,
    PatternMismatch,
    PiggybankError,
)
from .game import evaluate_game, format_text_table
from .protocol import SessionConfig, derive_seed, run_session
from .sweeps import DEFAULT_SWEEP_LOSS, sweep_nm, tomography_bench
from .tomography import AngleGrid

SWEEP_COLUMNS = ["n_cover", "required_m", "achieved_error", "trials", "seed"]
GAME_COLUMNS = [
    "row",
    "col",
    "verdict",
    "total_photons",
    "threshold",
    "eve_bit_accuracy",
    "detected",
    "trials",
]
BENCH_COLUMNS = ["grid_size", "photons", "paper_budget", "success_rate", "rmse", "trials"]


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return doc


def _config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


class _Fields:
    """Strict view over a config dict: unknown keys are config errors."""

    def __init__(self, doc: dict, context: str):
        self._doc = dict(doc)
        self._context = context

    def take(self, key: str, default=None, required: bool = False):
        if key in self._doc:
            return self._doc.pop(key)
        if required:
            raise ConfigError(f"{self._context}: missing required key {key!r}")
        return default

    def finish(self) -> None:
        if self._doc:
            raise ConfigError(
                f"{self._context}: unknown keys {sorted(self._doc)} (typo?)"
            )


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_json(path: Path, meta: dict, payload: dict) -> None:
    doc = {"meta": meta}
    doc.update(payload)
    _write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, meta: dict, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write(f"# seed={meta['seed']} config_hash={meta['config_hash']} version={meta['version']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _write_text(path, buf.getvalue())


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _resolve_out(args, command: str, default_ext: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(f"piggybank_{command.replace('-', '_')}.{default_ext}")


def _meta(seed: int, doc: dict) -> dict:
    return {"seed": seed, "config_hash": _config_hash(doc), "version": __version__}


# --- classical ---------------------------------------------------------------


def _keys_from_config(fields: _Fields) -> PiggyBankKeys:
    keys_doc = fields.take("keys")
    if keys_doc is not None:
        kf = _Fields(keys_doc, "keys")
        p = kf.take("p", required=True)
        q = kf.take("q", required=True)
        e = kf.take("e", required=True)
        d = kf.take("d")
        kf.finish()
        keys = keygen(int(p), int(q), int(e))
        if d is not None and (int(d) * keys.e) % keys.phi != 1:
            raise ConfigError(f"supplied d = {d} is not an inverse of e mod phi")
        return keys
    p = fields.take("p", required=True)
    q = fields.take("q", required=True)
    e = fields.take("e", required=True)
    return keygen(int(p), int(q), int(e))


def _hash_spec_from(doc, context: str) -> HashSpec:
    if doc is None:
        raise ConfigError(f"{context}: missing required key 'hash'")
    hf = _Fields(doc, f"{context}.hash")
    mode = hf.take("mode", required=True)
    if mode == "explicit":
        k = hf.take("k", required=True)
        hf.finish()
        return HashSpec.explicit(int(k))
    if mode == "modular":
        prime = hf.take("prime", required=True)
        hf.finish()
        return HashSpec.modular(int(prime))
    raise ConfigError(f"{context}: hash mode must be 'explicit' or 'modular', got {mode!r}")


def cmd_classical(args) -> int:
    doc = _load_config(args.config)
    fields = _Fields(doc, "classical")
    keys = _keys_from_config(fields)
    s = fields.take("S", required=True)
    r = fields.take("R")
    reduce_c = bool(fields.take("reduce", True))
    hash_spec = _hash_spec_from(fields.take("hash"), "classical")
    config_seed = int(fields.take("seed", 0))  # always consumed, flag wins
    seed = args.seed if args.seed is not None else config_seed
    fields.finish()

    rng = np.random.default_rng(seed)
    transcript = run_classical_session(
        keys, int(s), hash_spec, r=None if r is None else int(r), reduce=reduce_c, rng=rng
    )
    meta = _meta(seed, doc)
    out = _resolve_out(args, "classical", args.format or "json")
    record = transcript.to_dict()
    if (args.format or "json") == "json":
        _write_json(out, meta, {"transcript": record})
    else:
        header = list(record)
        _write_csv(out, meta, header, [[_fmt(record[k]) for k in header]])
    print(
        f"classical exchange on n={transcript.n}: recovered K={transcript.recovered_k}, "
        f"S={transcript.recovered_s} ({'reduced' if transcript.reduced else 'unreduced'} C)"
    )
    print(f"wrote {out}")
    return 0


# --- quantum -----------------------------------------------------------------


def _session_config_from(fields: _Fields, seed: int, base: SessionConfig | None = None) -> SessionConfig:
    base = base if base is not None else SessionConfig()
    return SessionConfig(
        n_cover=int(fields.take("n_cover", base.n_cover)),
        m_message=int(fields.take("m_message", base.m_message)),
        grid_size=int(fields.take("grid_size", base.grid_size)),
        message_basis=float(fields.take("message_basis", base.message_basis)),
        message_bits=str(fields.take("message_bits", base.message_bits)),
        seed=seed,
        loss_rate=float(fields.take("loss_rate", base.loss_rate)),
        confidence=float(fields.take("confidence", base.confidence)),
    )


def _strategy_from(doc, context: str) -> AttackStrategy | None:
    if doc is None:
        return None
    af = _Fields(doc, f"{context}.adversary")
    mode_name = str(af.take("mode", "siphon"))
    try:
        mode = AttackMode(mode_name)
    except ValueError:
        raise ConfigError(f"{context}: unknown adversary mode {mode_name!r}") from None
    strategy = AttackStrategy(
        mode=mode,
        cover_out_take=int(af.take("cover_out_take", 0)),
        cover_return_take=int(af.take("cover_return_take", 0)),
        message_take=int(af.take("message_take", 0)),
        eve_grid=AngleGrid(int(af.take("eve_grid_size", 8))),
        eve_budget_factor=float(af.take("eve_budget_factor", 1.0)),
    )
    af.finish()
    return strategy


def cmd_quantum(args) -> int:
    doc = _load_config(args.config)
    fields = _Fields(doc, "quantum")
    sessions = int(fields.take("sessions", 1))
    if sessions < 1:
        raise ConfigError(f"sessions must be >= 1, got {sessions}")
    god_view = bool(fields.take("god_view", False))
    strategy = _strategy_from(fields.take("adversary"), "quantum")
    config_seed = int(fields.take("seed", 0))  # always consumed, flag wins
    seed = args.seed if args.seed is not None else config_seed
    config = _session_config_from(fields, seed=0)
    fields.finish()

    transcripts = []
    for i in range(sessions):
        cfg = replace(config, seed=derive_seed(seed, i))
        transcripts.append(run_session(cfg, strategy, god_view=god_view))

    decoded = [t for t in transcripts if t.decoded_bits is not None]
    total_bits = sum(len(t.message_bits) for t in decoded)
    total_errors = sum(t.bit_errors for t in decoded)
    summary = {
        "sessions": sessions,
        "aborted": sum(t.verdict != "OK" for t in transcripts),
        "decoded_sessions": len(decoded),
        "bit_error_rate": (total_errors / total_bits) if total_bits else None,
        "theta_hit_rate": (
            sum(t.theta_hat_index == t.theta_index for t in decoded) / len(decoded)
            if decoded
            else None
        ),
    }
    meta = _meta(seed, doc)
    out = _resolve_out(args, "quantum", args.format or "json")
    if (args.format or "json") == "json":
        _write_json(
            out, meta, {"summary": summary, "transcripts": [t.to_dict() for t in transcripts]}
        )
    else:
        header = [
            "session",
            "seed",
            "verdict",
            "detected",
            "theta_index",
            "theta_hat_index",
            "theta",
            "theta_hat",
            "decoded_bits",
            "bit_errors",
        ]
        rows = [
            [
                i,
                t.seed,
                t.verdict,
                _fmt(t.detected),
                _fmt(t.theta_index),
                _fmt(t.theta_hat_index),
                _fmt(t.theta),
                _fmt(t.theta_hat),
                _fmt(t.decoded_bits),
                _fmt(t.bit_errors),
            ]
            for i, t in enumerate(transcripts)
        ]
        _write_csv(out, meta, header, rows)
    ber = summary["bit_error_rate"]
    print(
        f"quantum: {sessions} session(s), {summary['aborted']} aborted, "
        f"bit error rate {ber if ber is None else f'{ber:.4f}'}"
    )
    print(f"wrote {out}")
    return 0


# --- sweep-nm ----------------------------------------------------------------


def cmd_sweep_nm(args) -> int:
    doc = _load_config(args.config)
    fields = _Fields(doc, "sweep-nm")
    n_ladder = [int(n) for n in fields.take("n_ladder", [64, 256, 1024, 4096])]
    epsilon = float(fields.take("epsilon", 0.01))
    max_m = int(fields.take("max_m", 16))
    trials = int(fields.take("trials", 400))
    grid_size = int(fields.take("grid_size", 16))
    bits_per_session = int(fields.take("bits_per_session", 8))
    loss_rate = float(fields.take("loss_rate", DEFAULT_SWEEP_LOSS))
    config_seed = int(fields.take("seed", 0))  # always consumed, flag wins
    seed = args.seed if args.seed is not None else config_seed
    fields.finish()

    rows = sweep_nm(
        n_ladder,
        epsilon=epsilon,
        max_m=max_m,
        trials=trials,
        grid_size=grid_size,
        bits_per_session=bits_per_session,
        seed=seed,
        loss_rate=loss_rate,
    )
    meta = _meta(seed, doc)
    out = _resolve_out(args, "sweep-nm", args.format or "csv")
    table = [
        [r.n_cover, r.required_m, _fmt(r.achieved_error), r.trials, r.seed] for r in rows
    ]
    if (args.format or "csv") == "csv":
        _write_csv(out, meta, SWEEP_COLUMNS, table)
    else:
        _write_json(
            out,
            meta,
            {"rows": [dict(zip(SWEEP_COLUMNS, [r.n_cover, r.required_m, r.achieved_error, r.trials, r.seed])) for r in rows]},
        )
    if not args.no_plot:
        fig_path = out.with_suffix(".png")
        plots.render_sweep_figure(rows, str(fig_path))
        print(f"wrote {fig_path}")
    for r in rows:
        label = r.required_m if r.required_m >= 0 else "not found"
        print(f"n={r.n_cover}: required m = {label} (error {r.achieved_error:.4f})")
    print(f"wrote {out}")
    return 0


# --- game-matrix -------------------------------------------------------------


def cmd_game_matrix(args) -> int:
    doc = _load_config(args.config)
    fields = _Fields(doc, "game-matrix")
    config_seed = int(fields.take("seed", 0))  # always consumed, flag wins
    seed = args.seed if args.seed is not None else config_seed
    trials = int(fields.take("trials", 50))
    few_count = int(fields.take("few_count", 4))
    many_target = int(fields.take("many_target", 160))
    eve_grid_size = int(fields.take("eve_grid_size", 8))
    eve_budget_factor = float(fields.take("eve_budget_factor", 1.0))
    measure_empirical = bool(fields.take("measure_empirical", True))
    low_doc = fields.take("low")
    high_doc = fields.take("high")
    fields.finish()

    from .game import DEFAULT_HIGH, DEFAULT_LOW

    low = high = None
    if low_doc is not None:
        lf = _Fields(low_doc, "game-matrix.low")
        low = _session_config_from(lf, seed=0, base=DEFAULT_LOW)
        lf.finish()
    if high_doc is not None:
        hf = _Fields(high_doc, "game-matrix.high")
        high = _session_config_from(hf, seed=0, base=DEFAULT_HIGH)
        hf.finish()

    result = evaluate_game(
        low_config=low,
        high_config=high,
        few_count=few_count,
        many_target=many_target,
        trials=trials,
        seed=seed,
        eve_grid=AngleGrid(eve_grid_size),
        eve_budget_factor=eve_budget_factor,
        measure_empirical=measure_empirical,
    )

    meta = _meta(seed, doc)
    out = _resolve_out(args, "game-matrix", "csv")
    cell_rows = [
        [
            c.row,
            c.col,
            c.verdict.value,
            _fmt(c.total_photons),
            c.threshold,
            _fmt(c.eve_bit_accuracy),
            _fmt(c.detected),
            c.trials,
        ]
        for c in result.cells
    ]
    _write_csv(out, meta, GAME_COLUMNS, cell_rows)

    trials_path = out.with_name(out.stem + "_trials.csv")
    trial_header = [
        "row",
        "col",
        "trial",
        "seed",
        "detected",
        "verdict",
        "total_photons",
        "eve_bit_accuracy",
        "eve_theta_hat",
        "theta",
    ]
    trial_rows = [[_fmt(t[k]) for k in trial_header] for t in result.trial_rows]
    _write_csv(trials_path, meta, trial_header, trial_rows)

    json_path = out.with_suffix(".json")
    _write_json(
        json_path,
        meta,
        {
            "cells": [
                {
                    "row": c.row,
                    "col": c.col,
                    "verdict": c.verdict.value,
                    "total_photons": c.total_photons,
                    "threshold": c.threshold,
                    "eve_bit_accuracy": c.eve_bit_accuracy,
                    "detected": c.detected,
                    "trials": c.trials,
                    "annotation": c.annotation,
                }
                for c in result.cells
            ],
            "expected_pattern_matched": result.pattern_ok,
            "eve_empirical_requirement": result.eve_empirical_requirement,
            "threshold": result.threshold,
            "note": result.note,
        },
    )

    table = format_text_table(result)
    table_path = out.with_suffix(".txt")
    _write_text(table_path, table + "\n")
    print(table)
    if not args.no_plot:
        fig_path = out.with_suffix(".png")
        plots.render_game_figure(result, str(fig_path))
        print(f"wrote {fig_path}")
    print(f"wrote {out}, {trials_path}, {json_path}, {table_path}")
    if not result.pattern_ok:
        raise PatternMismatch(
            f"verdict pattern {[[v.value for v in row] for row in result.pattern]} "
            "does not match the expected [[SAFE, SAFE_DETECTED], [SAFE, UNSAFE]]"
        )
    return 0


# --- tomography-bench --------------------------------------------------------


def cmd_tomography_bench(args) -> int:
    doc = _load_config(args.config)
    fields = _Fields(doc, "tomography-bench")
    grid_sizes = [int(g) for g in fields.take("grid_sizes", [8, 16, 64])]
    photon_ladder = [int(c) for c in fields.take("photon_ladder", [16, 64, 256, 1024, 4096])]
    trials = int(fields.take("trials", 400))
    config_seed = int(fields.take("seed", 0))  # always consumed, flag wins
    seed = args.seed if args.seed is not None else config_seed
    fields.finish()

    rows = tomography_bench(grid_sizes, photon_ladder, trials=trials, seed=seed)
    meta = _meta(seed, doc)
    out = _resolve_out(args, "tomography-bench", args.format or "csv")
    table = [
        [r.grid_size, r.photons, r.paper_budget, _fmt(r.success_rate), _fmt(r.rmse), r.trials]
        for r in rows
    ]
    if (args.format or "csv") == "csv":
        _write_csv(out, meta, BENCH_COLUMNS, table)
    else:
        _write_json(
            out,
            meta,
            {
                "rows": [
                    {
                        "grid_size": r.grid_size,
                        "photons": r.photons,
                        "paper_budget": r.paper_budget,
                        "success_rate": r.success_rate,
                        "rmse": r.rmse,
                        "trials": r.trials,
                    }
                    for r in rows
                ]
            },
        )
    if not args.no_plot:
        fig_path = out.with_suffix(".png")
        plots.render_bench_figure(rows, str(fig_path))
        print(f"wrote {fig_path}")
    print(f"wrote {out}")
    return 0


# --- entry point -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for protocol
    failures, so usage problems are remapped to the config-error code."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="piggybank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("classical", cmd_classical, "run one classical exchange"),
        ("quantum", cmd_quantum, "run quantum sessions"),
        ("sweep-nm", cmd_sweep_nm, "required message redundancy vs cover budget"),
        ("game-matrix", cmd_game_matrix, "strategy matrix verdicts"),
        ("tomography-bench", cmd_tomography_bench, "estimator success and RMSE benchmark"),
    ]
    for name, fn, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="overrides config seed")
        p.add_argument("--out", help="output path (siblings derive from it)")
        p.add_argument("--format", choices=["json", "csv"], default=None)
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
        p.set_defaults(fn=fn)
    return parser


def _error_record(code: int, exc: Exception) -> int:
    record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(record, sort_keys=True))
    return code


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, NonPrimeFactor, ExponentNotCoprime) as exc:
        return _error_record(1, exc)
    except PatternMismatch as exc:
        return _error_record(3, exc)
    except PiggybankError as exc:
        return _error_record(2, exc)


if __name__ == "__main__":
    sys.exit(main())
