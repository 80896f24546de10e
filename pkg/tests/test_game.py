"""Strategy-matrix study: verdict aggregation and the loss-cover caveat."""

from dataclasses import replace

import pytest

from piggybank.errors import ConfigError
from piggybank.game import (
    COLS,
    DEFAULT_HIGH,
    DEFAULT_LOW,
    EXPECTED_PATTERN,
    LOSS_COVER_NOTE,
    ROWS,
    Verdict,
    evaluate_game,
    format_text_table,
)
from piggybank.tomography import AngleGrid


class TestEvaluateGame:
    RESULT = evaluate_game(trials=10, seed=0)

    def test_expected_pattern_with_defaults(self):
        assert self.RESULT.pattern == EXPECTED_PATTERN
        assert self.RESULT.pattern_ok

    def test_unsafe_cell_details(self):
        cell = self.RESULT.cell("HIGH_NM", "SIPHON_MANY")
        assert cell.verdict is Verdict.UNSAFE
        assert cell.total_photons >= cell.threshold
        assert cell.detected < 0.5

    def test_greedy_low_row_is_caught(self):
        cell = self.RESULT.cell("LOW_NM", "SIPHON_MANY")
        assert cell.verdict is Verdict.SAFE_DETECTED
        assert cell.detected >= 0.5

    def test_two_leg_budget_threshold(self):
        # 2 * budget with budget = 2^log2(grid size) photons per leg
        assert self.RESULT.threshold == 16
        doubled = evaluate_game(trials=2, seed=0, eve_budget_factor=2.0, measure_empirical=False)
        assert doubled.threshold == 32

    def test_trial_rows_cover_all_cells(self):
        assert len(self.RESULT.trial_rows) == len(ROWS) * len(COLS) * 10
        keys = {(t["row"], t["col"]) for t in self.RESULT.trial_rows}
        assert keys == {(r, c) for r in ROWS for c in COLS}

    def test_empirical_requirement_reported(self):
        assert self.RESULT.eve_empirical_requirement == 64

    def test_loss_cover_note_attached(self):
        assert self.RESULT.note == LOSS_COVER_NOTE

    def test_cell_lookup_raises_on_unknown(self):
        with pytest.raises(KeyError):
            self.RESULT.cell("LOW_NM", "NOPE")

    def test_trials_domain(self):
        with pytest.raises(ConfigError):
            evaluate_game(trials=0)


class TestLosslessNeverUnsafe:
    def test_greed_always_detected_without_loss(self):
        low = replace(DEFAULT_LOW, loss_rate=0.0)
        high = replace(DEFAULT_HIGH, loss_rate=0.0)
        result = evaluate_game(
            low_config=low, high_config=high, trials=6, seed=1, measure_empirical=False
        )
        for cell in result.cells:
            assert cell.verdict is not Verdict.UNSAFE
        for row in ROWS:
            assert result.cell(row, "SIPHON_MANY").verdict is Verdict.SAFE_DETECTED
        assert not result.pattern_ok


class TestTextTable:
    def test_mentions_every_verdict_and_note(self):
        result = evaluate_game(trials=4, seed=0, measure_empirical=False)
        text = format_text_table(result)
        for row in result.pattern:
            for verdict in row:
                assert verdict.value in text
        assert LOSS_COVER_NOTE in text
        assert "low range" in text

    def test_custom_grid_changes_budget(self):
        result = evaluate_game(
            trials=2, seed=0, eve_grid=AngleGrid(16), measure_empirical=False
        )
        assert result.threshold == 32
