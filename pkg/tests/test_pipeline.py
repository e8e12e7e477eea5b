import math

import numpy as np
import pytest

from xxzent import ed
from xxzent.bethe import SolverOptions
from xxzent.observables import C0, ObservablePoint, concurrence_xxz, correlation_length
from xxzent.pipeline import (
    FitResult,
    Provenance,
    SweepTable,
    delta_grid,
    even_odd_csv,
    even_odd_study,
    figure_csv,
    figure_data,
    finite_size_study,
    fit_quadratic_scaling,
    fit_xi_scaling,
    fig2_grid,
    parse_range,
    run_sweep,
    sweep_grid,
    write_text,
)


def synthetic(deltas, c_of_delta, xi=lambda d: None):
    return SweepTable([ObservablePoint(d, 64, 0.0, 0.0, c_of_delta(d), xi(d)) for d in deltas],
                      Provenance.BETHE)


class TestGrid:
    def test_inclusive_endpoints(self):
        g = delta_grid(0.0, 3.0, 0.02)
        assert len(g) == 151 and g[0] == 0.0 and g[-1] == 3.0 and 1.0 in g

    def test_empty(self):
        assert delta_grid(1.0, 0.5, 0.1) == []

    def test_single_point(self):
        assert delta_grid(1.0, 1.0, None) == [1.0]

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            delta_grid(0.0, 1.0, -0.1)
        with pytest.raises(ValueError):
            delta_grid(0.0, 1.0, None)

    def test_parse_range(self):
        assert parse_range("0:3:0.05") == (0.0, 3.0, 0.05)
        assert parse_range("1:1.3") == (1.0, 1.3, None)
        with pytest.raises(ValueError):
            parse_range("1")

    def test_fig2_grid_is_uniform_in_nu(self):
        g = fig2_grid()
        nu = [0.5 * math.acosh(d) for d in g]
        assert np.allclose(np.diff(nu), 0.02, atol=1e-9)
        assert all(d > 1.0 for d in g)


class TestSweep:
    def test_empty_grid(self):
        t = run_sweep(16, 1.0, 0.0, 0.1)
        assert t.rows == [] and t.to_csv().count("\n") == 1

    def test_one_row_per_grid_point(self):
        t = run_sweep(32, 0.0, 2.0, 0.25)
        assert [p.delta for p in t.rows] == delta_grid(0.0, 2.0, 0.25)
        assert all(p.ok for p in t.rows)
        for p in t.rows:
            assert (p.xi is not None) == (p.delta > 1.0)
            assert p.concurrence == pytest.approx(concurrence_xxz(p.energy_per_site, p.gzz, p.delta), abs=1e-15)

    def test_ed_and_bethe_agree(self):
        b = run_sweep(12, 1.0, 1.0, None, "bethe").rows[0]
        e = run_sweep(12, 1.0, 1.0, None, "ed").rows[0]
        assert b.concurrence == pytest.approx(e.concurrence, abs=1e-8)
        assert b.energy_per_site == pytest.approx(e.energy_per_site, abs=1e-10)

    def test_thermo_rows(self):
        t = run_sweep(None, 0.0, 1.0, 0.5, "thermo")
        assert t.provenance is Provenance.THERMO
        assert all(p.n_sites is None for p in t.rows)
        assert t.rows[-1].concurrence == pytest.approx(C0, abs=1e-6)

    def test_failures_recorded_not_dropped(self):
        t = run_sweep(64, 0.5, 1.5, 0.5, options=SolverOptions(tol=1e-300, max_iter=3))
        assert len(t.rows) == 3 and len(t.failures) == 3
        assert all(p.status.startswith("failed") and math.isnan(p.concurrence) for p in t.rows)
        assert "failed" in t.to_csv()

    def test_thread_count_does_not_change_output(self):
        a = run_sweep(48, 0.0, 2.0, 0.1, threads=1).to_csv()
        b = run_sweep(48, 0.0, 2.0, 0.1, threads=4).to_csv()
        assert a == b

    @pytest.mark.parametrize("n,method", [(7, "bethe"), (None, "bethe"), (21, "ed"), (8, "dmrg")])
    def test_bad_requests(self, n, method):
        with pytest.raises(ValueError):
            run_sweep(n, 0.0, 1.0, 0.5, method)


class TestTable:
    def test_sorted_and_unique(self):
        rows = [ObservablePoint(d, n, 0.0, 0.0, 0.0) for d, n in [(1.0, 8), (0.5, 16), (0.5, 8)]]
        t = SweepTable(rows, Provenance.BETHE)
        assert [(p.delta, p.n_sites) for p in t.rows] == [(0.5, 8), (0.5, 16), (1.0, 8)]
        with pytest.raises(ValueError):
            SweepTable(rows + [ObservablePoint(1.0, 8, 1.0, 1.0, 1.0)], Provenance.BETHE)

    def test_csv_round_trip(self):
        t = run_sweep(24, 0.5, 2.0, 0.5)
        back = SweepTable.from_csv(t.to_csv())
        assert back.to_csv() == t.to_csv()


class TestFits:
    def test_quadratic_exact_recovery(self):
        t = synthetic(delta_grid(0.0, 1.3, 0.05), lambda d: 0.4 - 0.05 * (d - 1) ** 2)
        fit = fit_quadratic_scaling(t, (0.0, 1.3))
        assert fit.coefficients[0] == pytest.approx(0.4, abs=1e-12)
        assert fit.coefficients[1] == pytest.approx(0.05, abs=1e-12)
        assert fit.rms_residual < 1e-12 and fit.point_count == 27 and fit.model == "Quadratic"

    def test_xi_exact_recovery(self):
        t = synthetic(delta_grid(1.5, 6.0, 0.25), lambda d: 0.38 - 0.5 / correlation_length(d),
                      correlation_length)
        fit = fit_xi_scaling(t, None)
        assert fit.coefficients[0] == pytest.approx(0.38, abs=1e-12)
        assert fit.coefficients[1] == pytest.approx(-0.5, abs=1e-12)
        assert fit.model == "InverseXi"

    def test_xi_window_filters(self):
        t = synthetic(delta_grid(1.5, 6.0, 0.25), lambda d: 0.38 - 0.5 / correlation_length(d),
                      correlation_length)
        fit = fit_xi_scaling(t)
        assert fit.window == (0.0, 0.25)
        assert fit.point_count == sum(1 / correlation_length(d) < 0.25 for d in delta_grid(1.5, 6.0, 0.25))

    def test_underdetermined_windows(self):
        t = synthetic([0.0, 0.5, 1.0, 2.0], lambda d: 0.3)
        with pytest.raises(ValueError):
            fit_quadratic_scaling(t, (0.9, 1.1))
        with pytest.raises(ValueError):
            fit_quadratic_scaling(t, (1.0, 0.0))
        with pytest.raises(ValueError):
            fit_xi_scaling(t)

    def test_failed_rows_ignored(self):
        t = synthetic(delta_grid(0.0, 1.3, 0.1), lambda d: 0.4 - 0.05 * (d - 1) ** 2)
        t.rows.append(ObservablePoint(2.0, 64, math.nan, math.nan, math.nan, status="failed: x"))
        assert fit_quadratic_scaling(t, (0.0, 3.0)).point_count == 14

    def test_json(self):
        fit = FitResult("Quadratic", (0.386, 0.047), 1e-4, (0.0, 1.3), 66)
        assert fit.to_json().splitlines()[1].strip() == '"model": "Quadratic",'


class TestFiniteSize:
    def test_matches_ed_for_four_sites(self):
        t = finite_size_study([4], [1.0])
        g = ed.ground_state_ed(4, 1.0)
        c_ed = ed.wootters_concurrence(ed.two_site_rdm(g))
        assert t.rows[0].concurrence == pytest.approx(c_ed, abs=1e-8)

    def test_single_size_equals_sweep(self):
        grid = delta_grid(1.0, 2.0, 0.25)
        assert finite_size_study([40], grid).to_csv() == sweep_grid(40, grid).to_csv()

    def test_rows_for_every_size(self):
        t = finite_size_study([8, 16], [1.5, 2.0], threads=2)
        assert sorted((p.n_sites, p.delta) for p in t.rows) == [(8, 1.5), (8, 2.0), (16, 1.5), (16, 2.0)]
        assert t.rows[0].xi == t.rows[1].xi

    @pytest.mark.parametrize("sizes", [[6, 7], [2]])
    def test_rejects_bad_sizes(self, sizes):
        with pytest.raises(ValueError):
            finite_size_study(sizes, [1.0])


class TestEvenOdd:
    def test_small_rings(self):
        rows = even_odd_study(3, 1.0)
        assert rows[0].concurrence == pytest.approx(1.0, abs=1e-12) and not rows[0].degenerate
        assert rows[1].energy == pytest.approx(-3.0, abs=1e-12) and rows[1].degenerate

    def test_size_cap(self):
        with pytest.raises(ValueError):
            even_odd_study(16, 1.0)

    def test_csv(self):
        text = even_odd_csv(even_odd_study(4, 1.0))
        assert text.splitlines()[0] == "n_sites,concurrence,energy,degenerate"
        assert text.splitlines()[2].endswith(",true")


class TestFigureData:
    def test_fig1_rows_equal_sweep(self):
        text, table = figure_data(1, n_sites=64, grid=delta_grid(0.0, 3.0, 0.1))
        sweep = run_sweep(64, 0.0, 3.0, 0.1)
        assert table.rows == sweep.rows
        assert text.splitlines()[0] == "delta,concurrence,energy_per_site,gzz,status"
        assert len(text.splitlines()) == 32

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        figure_data(2, out=a, n_sites=64, grid=fig2_grid(0.05, 0.5, 0.05))
        figure_data(2, out=b, n_sites=64, grid=fig2_grid(0.05, 0.5, 0.05))
        assert a.read_bytes() == b.read_bytes()

    def test_fig3_columns(self):
        text, _ = figure_data(3, sizes=[8, 12], grid=[1.5, 2.0])
        lines = text.splitlines()
        assert lines[0] == "n_sites,delta,xi,concurrence,status"
        assert [l.split(",")[0] for l in lines[1:]] == ["8", "8", "12", "12"]

    def test_bad_id(self):
        with pytest.raises(ValueError):
            figure_data(4)

    def test_io_error_has_path(self, tmp_path):
        bad = tmp_path / "missing" / "out.csv"
        with pytest.raises(OSError, match="missing"):
            write_text(bad, "x")


@pytest.mark.slow
class TestLargeChain:
    def test_argmax_at_critical_point_coarse_grid(self):
        t = run_sweep(1280, 0.0, 3.0, 0.05)
        best = max(t.rows, key=lambda p: p.concurrence)
        assert best.delta == 1.0

    def test_quadratic_fit_breaks_away_from_criticality(self, fig1_table):
        near = fit_quadratic_scaling(fig1_table, (0.0, 1.3))
        far = fit_quadratic_scaling(fig1_table, (1.5, 3.0))
        assert near.rms_residual < 1e-3
        assert far.rms_residual >= 10 * near.rms_residual

    def test_xi_law_is_near_critical(self, fig2_table):
        windowed = fit_xi_scaling(fig2_table)
        full = fit_xi_scaling(fig2_table, None)
        assert max(p.inv_xi for p in fig2_table.rows if p.xi) > 0.5
        assert abs(full.coefficients[1] + 0.5) > abs(windowed.coefficients[1] + 0.5)

    def test_fig2_points_on_line(self, fig2_table):
        pts = [p for p in fig2_table.ok_rows() if p.xi is not None and p.inv_xi < 0.25]
        assert len(pts) > 10
        assert max(abs(p.concurrence - (C0 - 0.5 * p.inv_xi)) for p in pts) < 0.01

    def test_fig1_critical_row(self, fig1_table):
        text = figure_csv(1, fig1_table)
        row = next(l for l in text.splitlines() if l.startswith("1,"))
        assert abs(float(row.split(",")[1]) - 0.386) < 5e-3
