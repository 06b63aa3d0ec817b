import math

import pytest

from mhd_wavelab import PhysParams, Regime
from mhd_wavelab.experiments import (
    InitialDataSpec,
    ScanRow,
    doubling_ratios,
    eta_jobs,
    refinement_jobs,
    run_scan,
    w0_doubling_jobs,
)
from mhd_wavelab.experiments.scans import (
    H1_OFFSET_RANGE,
    bootstrap_check,
    h1_blowup_check,
    h1_offsets,
    monotone,
    rows_to_records,
)
from mhd_wavelab.solver import SolverSettings

P = PhysParams()
SPEC = InitialDataSpec()
SETTINGS = SolverSettings(nodes=256, traces_per_family=2, fast_traces=3)


def row(label, T_star, **fields):
    return ScanRow(
        label=label, kind="shock", eta=0.1, theta=0.01, nodes=256, W0=0.01, T_lo=1.0, T_star=T_star, T_hi=2.0, **fields
    )


def finished(label, **fields):
    ratios = dict(S_max=1.2, J_over_W0=1.1, V_over_eta_W0sq=3.0, W_check_over_eta_W0sq=5.0, max_w_other=0.02)
    ratios.update(fields)
    return row(label, 1.5, **ratios)


def ladder_row(offset, value):
    return row(f"offset={offset}", 1.5, h1_offset=offset, h1_value=value)


class TestJobs:
    """Test scan job builders."""

    def test_w0_doubling(self):
        """Test theta is scaled in both the data and the parameters."""
        jobs = w0_doubling_jobs(SPEC, P, SETTINGS)

        assert [job.label for job in jobs] == ["W0x1", "W0x2", "W0x4"]
        assert [job.spec.theta for job in jobs] == pytest.approx([0.01, 0.02, 0.04])
        assert jobs[2].params.theta == pytest.approx(0.04)

    def test_eta_sweep(self):
        """Test eta is set on both the data and the parameters."""
        jobs = eta_jobs(SPEC, P, SETTINGS, [0.1, 0.05])

        assert [job.spec.eta for job in jobs] == [0.1, 0.05]
        assert jobs[1].params.eta == 0.05
        assert jobs[1].label == "eta=0.05"

    def test_refinement(self):
        """Test only the node count changes."""
        jobs = refinement_jobs(SPEC, P, SETTINGS, [256, 512])

        assert [job.settings.nodes for job in jobs] == [256, 512]
        assert jobs[1].settings.cfl == SETTINGS.cfl

    def test_refinement_sorts_and_offsets(self):
        """Test grids run coarse to fine with the H1 offset shrinking toward T*."""
        jobs = refinement_jobs(SPEC, P, SETTINGS, [1024, 256, 512])

        assert [job.settings.nodes for job in jobs] == [256, 512, 1024]
        assert [job.h1_offset for job in jobs] == pytest.approx(h1_offsets(3))

    def test_offsets_span_range(self):
        """Test the offsets shrink geometrically by the full range."""
        offsets = h1_offsets(4)

        assert offsets[0] / offsets[-1] == pytest.approx(H1_OFFSET_RANGE)
        assert monotone(offsets, decreasing=True)
        assert h1_offsets(1) == [offsets[0]]


class TestAnalysis:
    """Test scan summaries."""

    def test_doubling_ratios(self):
        """Test consecutive T* ratios skip failed rows."""
        rows = [row("a", 40.0), row("b", 20.0), row("c", None), row("d", 5.0)]

        assert doubling_ratios(rows) == [2.0]

    @pytest.mark.parametrize(
        "values, decreasing, expected",
        [
            ([3.0, 2.0, 1.0], True, True),
            ([3.0, 3.0, 1.0], True, False),
            ([1.0, 2.0], False, True),
            ([1.0, None], False, False),
            ([1.0], True, False),
        ],
    )
    def test_monotone(self, values, decreasing, expected):
        """Test strict monotonicity with missing values counting as failure."""
        assert monotone(values, decreasing) is expected

    def test_records(self):
        """Test rows convert to plain dicts for CSV output."""
        records = rows_to_records([row("a", 1.5)])

        assert records[0]["label"] == "a"
        assert records[0]["T_star"] == 1.5
        assert "error_code" not in records[0] or records[0]["error_code"] is None


class TestRunScan:
    """Test scan execution."""

    def test_failed_job_becomes_row(self):
        """Test a job that leaves the ball is reported with its error code."""
        jobs = w0_doubling_jobs(InitialDataSpec(theta=0.5), PhysParams(theta=0.5), SETTINGS, factors=(1.0,))

        rows = run_scan(jobs, Regime.MHD)

        assert len(rows) == 1
        assert rows[0].error_code == "BALL_EXIT"
        assert rows[0].T_star is None
        assert math.isnan(rows[0].W0)

    def test_rows_keep_job_order(self):
        """Test rows come back in job order with a worker pool."""
        jobs = w0_doubling_jobs(InitialDataSpec(theta=0.5), PhysParams(theta=0.5), SETTINGS, factors=(1.0, 2.0))

        rows = run_scan(jobs, Regime.MHD, threads=2)

        assert [r.label for r in rows] == ["W0x1", "W0x2"]


class TestBootstrapCheck:
    """Test the bootstrap gates on finished runs."""

    def test_bounded_rows_pass(self):
        """Test rows inside every bound pass with K the largest scaled ratio."""
        check = bootstrap_check([finished("a"), finished("b", W_check_over_eta_W0sq=12.0)])

        assert check.failed == []
        assert check.K == 12.0

    def test_large_S(self):
        """Test S above two fails that row only."""
        check = bootstrap_check([finished("a", S_max=10.0), finished("b")])

        assert check.failed == ["bootstrap_ratios:a"]

    def test_large_J(self):
        """Test J above 2 W0 fails the row."""
        assert bootstrap_check([finished("a", J_over_W0=2.5)]).failed == ["bootstrap_ratios:a"]

    def test_nan_ratio(self):
        """Test a NaN scaled ratio fails the row and is left out of K."""
        check = bootstrap_check([finished("a", V_over_eta_W0sq=float("nan"))])

        assert check.failed == ["bootstrap_ratios:a"]
        assert check.K == 5.0

    def test_spurious_amplitude(self):
        """Test an off-family amplitude above 10 theta is flagged."""
        check = bootstrap_check([finished("a", max_w_other=0.2)])

        assert check.failed == ["spurious_amplitude:a"]

    def test_K_across_runs(self):
        """Test one constant must cover every run."""
        check = bootstrap_check([finished("a"), finished("b", V_over_eta_W0sq=80.0)])

        assert check.K == 80.0
        assert check.failed == ["bootstrap_K"]

    def test_error_rows_skipped(self):
        """Test failed runs contribute neither failures nor K."""
        check = bootstrap_check([row("a", None, error_code="BALL_EXIT"), row("b", None)])

        assert check.failed == []
        assert check.K == 0.0


class TestH1BlowupCheck:
    """Test the H1 growth gate over the refinement ladder."""

    def test_flat_series_fails(self):
        """Test a series that does not grow fails."""
        check = h1_blowup_check([ladder_row(o, 1.0) for o in h1_offsets(4)])

        assert check.growth == pytest.approx(1.0)
        assert not check.passed

    def test_growing_series_passes(self):
        """Test monotone growth by more than three passes whatever the row order."""
        offsets = h1_offsets(4)
        rows = [ladder_row(o, v) for o, v in zip(offsets, [1.0, 1.8, 2.9, 4.0])]

        check = h1_blowup_check(rows[::-1])

        assert check.passed
        assert check.offsets == offsets
        assert check.growth == pytest.approx(4.0)

    def test_non_monotone_fails(self):
        """Test enough growth with a dip on the way still fails."""
        rows = [ladder_row(o, v) for o, v in zip(h1_offsets(4), [1.0, 3.5, 2.0, 4.0])]

        assert not h1_blowup_check(rows).passed

    def test_slow_growth_fails(self):
        """Test monotone growth below three fails."""
        rows = [ladder_row(o, v) for o, v in zip(h1_offsets(3), [1.0, 1.5, 2.5])]

        assert not h1_blowup_check(rows).passed

    def test_missing_value_fails(self):
        """Test a grid with no H1 value fails the gate."""
        rows = [ladder_row(o, v) for o, v in zip(h1_offsets(3), [1.0, None, 4.0])]

        check = h1_blowup_check(rows)

        assert check.growth == pytest.approx(4.0)
        assert not check.passed

    def test_rows_without_offset_ignored(self):
        """Test rows outside the ladder are left out."""
        rows = [ladder_row(o, v) for o, v in zip(h1_offsets(2), [1.0, 3.5])] + [row("extra", 1.5, h1_value=0.1)]

        check = h1_blowup_check(rows)

        assert len(check.values) == 2
        assert check.passed
