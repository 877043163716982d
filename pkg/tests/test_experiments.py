import json
import math

import numpy as np
import pytest

import graphonlab as gl
from graphonlab.errors import ValidationError
from graphonlab.experiments import render_svg, report_from_dict, report_to_dict


def test_theorem_constant_closed_form():
    r = gl.run_theorem_sweep(gl.constant(0.5), 1, [2, 4, 8], seed=7)
    es = [row.l1_expected_vs_limit for row in r.rows]
    assert es == [0.25, 0.125, 0.0625]
    assert [row.n for row in r.rows] == [2, 4, 8]
    assert not r.incomplete


def test_theorem_product_decreasing_with_lipschitz_bound():
    r = gl.run_theorem_sweep(gl.builtin("product"), 1, [4, 8, 16, 32], seed=7)
    es = [row.l1_expected_vs_limit for row in r.rows]
    assert all(b < a for a, b in zip(es, es[1:]))
    for row in r.rows:
        assert row.l1_expected_vs_limit <= (math.sqrt(2.0) + 1.0) / row.n


def test_theorem_k2_constant_matches_matrix_algebra():
    k = 2
    r = gl.run_theorem_sweep(gl.constant(0.5), k, [4, 8], seed=7)
    for row in r.rows:
        n = row.n
        e = 0.5 * (np.ones((n, n)) - np.eye(n))
        pk = np.linalg.matrix_power(e, k) / float(n) ** (k - 1)
        want = float(np.abs(pk - 0.5**k).mean())
        assert row.l1_expected_vs_limit == pytest.approx(want, abs=1e-10)
    es = [row.l1_expected_vs_limit for row in r.rows]
    assert es[1] < es[0]


@pytest.mark.parametrize("name", ["constant", "product", "minmax", "attachment"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_theorem_doubling_invariant_to_64(name, k):
    w = gl.constant(0.5) if name == "constant" else gl.builtin(name)
    r = gl.run_theorem_sweep(w, k, [4, 8, 16, 32, 64], seed=7)
    es = [row.l1_expected_vs_limit for row in r.rows]
    assert all(b < a for a, b in zip(es, es[1:]))
    assert es[-1] < es[0] / 4.0
    if k == 1 and w.lipschitz is not None:
        bound = math.sqrt(2.0) * w.lipschitz + w.sup_bound
        for row in r.rows:
            assert row.l1_expected_vs_limit <= bound / row.n


def test_theorem_rows_carry_sampled_distances():
    r = gl.run_theorem_sweep(gl.builtin("attachment"), 1, [4, 8], seed=7)
    for row in r.rows:
        assert row.l1_sampled_vs_limit is not None and row.l1_sampled_vs_limit >= 0
        assert row.cutnorm_sampled_vs_limit is not None and row.cutnorm_sampled_vs_limit >= 0
        assert row.wall_time > 0


def test_theorem_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        gl.run_theorem_sweep(gl.constant(0.5), 1, [], seed=1)
    with pytest.raises(ValidationError):
        gl.run_theorem_sweep(gl.constant(0.5), 1, [1, 2], seed=1)
    with pytest.raises(ValidationError):
        gl.run_theorem_sweep(gl.constant(0.5), 0, [2, 4], seed=1)
    with pytest.raises(ValidationError):
        gl.run_theorem_sweep(gl.from_expression("x"), 1, [2, 4], seed=1)


def test_theorem_incomplete_on_quadrature_failure():
    q = gl.QuadratureSpec(base_grid=4, max_refinements=0, tol=1e-9)
    r = gl.run_theorem_sweep(gl.builtin("minmax"), 1, [3, 5], q, seed=1)
    assert r.incomplete
    assert r.rows == []


def test_counterexample_er_distances():
    r = gl.run_counterexample_sweep(0.5, [4, 8], draws_per_n=5, seed=7)
    for row in r.rows:
        assert row.l1_sampled_vs_limit == pytest.approx(0.5, abs=1e-15)
        assert row.l1_expected_vs_limit == pytest.approx(0.5 / row.n, abs=1e-15)
        assert row.cutnorm_sampled_vs_limit > 0


def test_counterexample_one_edge_graph_cut_norm():
    g = gl.SimpleGraph(2, frozenset({(0, 1)}))
    diff = gl.StepGraphon(2, gl.canonical_graphon(g).values - 0.5, -1.0, 1.0)
    assert gl.cut_norm_exact(diff).value == pytest.approx(0.125, abs=1e-15)


def test_counterexample_validates_inputs():
    with pytest.raises(ValidationError):
        gl.run_counterexample_sweep(1.5, [4], 2, seed=1)
    with pytest.raises(ValidationError):
        gl.run_counterexample_sweep(0.5, [4], 0, seed=1)
    with pytest.raises(ValidationError):
        gl.run_counterexample_sweep(0.5, [], 2, seed=1)


def test_report_json_round_trip():
    r = gl.run_theorem_sweep(gl.constant(0.5), 1, [2, 4, 8], seed=7)
    assert report_from_dict(report_to_dict(r)) == r


def test_emit_report_files(tmp_path):
    r = gl.run_counterexample_sweep(0.5, [4, 8, 12], draws_per_n=2, seed=7)
    written = gl.emit_report(r, tmp_path / "report", formats=("csv", "json", "svg"))
    csv_lines = written["csv"].read_text().splitlines()
    assert len(csv_lines) == 4
    assert csv_lines[0].startswith("n,l1_expected_vs_limit")
    assert gl.load_report(written["json"]) == r
    svg = written["svg"].read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_emit_report_rejects_empty_and_unknown_formats(tmp_path):
    r = gl.run_theorem_sweep(gl.constant(0.5), 1, [2, 4], seed=7)
    with pytest.raises(ValidationError, match="empty sweep"):
        gl.emit_report(gl.ConvergenceReport("x", "theorem", 1, 0, gl.QuadratureSpec(), []),
                       tmp_path / "r")
    with pytest.raises(ValidationError, match="unknown report formats"):
        gl.emit_report(r, tmp_path / "r", formats=("csv", "pdf"))


def test_reports_are_byte_reproducible(tmp_path):
    for runner in (
        lambda: gl.run_theorem_sweep(gl.builtin("product"), 1, [4, 8], seed=5),
        lambda: gl.run_counterexample_sweep(0.5, [4, 8], 3, seed=5),
    ):
        a = runner()
        b = runner()
        pa = gl.emit_report(a, tmp_path / "a", formats=("csv", "json", "svg"))
        pb = gl.emit_report(b, tmp_path / "b", formats=("csv", "json", "svg"))
        for fmt in pa:
            assert pa[fmt].read_bytes() == pb[fmt].read_bytes()


def test_report_row_ordering_enforced():
    rows = [gl.SweepRow(8, 0.1, None, None), gl.SweepRow(4, 0.2, None, None)]
    with pytest.raises(ValidationError):
        gl.ConvergenceReport("x", "theorem", 1, 0, gl.QuadratureSpec(), rows)


def test_svg_handles_single_series():
    rows = [gl.SweepRow(4, 0.25, None, None), gl.SweepRow(8, 0.125, None, None)]
    r = gl.ConvergenceReport("x", "theorem", 1, 0, gl.QuadratureSpec(), rows)
    svg = render_svg(r)
    assert "reference 1/n" in svg


def test_wall_time_not_serialized():
    r = gl.run_theorem_sweep(gl.constant(0.5), 1, [2, 4], seed=7)
    doc = report_to_dict(r)
    assert "wall_time" not in json.dumps(doc)
