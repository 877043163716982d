"""Convergence sweeps: expected graphons against their limits, and the
ER counterexample where only the cut norm decays.

The headline quantity of a theorem sweep is

    e_n = || (expected step graphon at n)^(k) - W^(k) ||_1

computed with exact matrix algebra whenever the k-th power of the limit is a
step function (constants, step inputs), and by aligned midpoint quadrature
otherwise. Each row also records, for one seeded sample graph per n, the L1
distance of the sampled power to the limit and the cut norm of its signed
difference to the discretized limit; sampled L1 distances do not decay, which
is the contrast the counterexample sweep makes exact at W = constant(p).

Quadrature tolerances for analytic limits are tightened to one tenth of the
smallest expected e_n in the sweep, (sqrt(2) L + sup W) / (10 max(ns)), so
measurement error cannot mask convergence. The rate constant L is taken from
the builtin catalog and defaults to 1; the O(1/n) target itself is derived
for Lipschitz kernels and is not asserted for merely integrable inputs.

Wall-clock timings are kept on rows in memory but excluded from emitted
files and equality, which keeps reports byte-reproducible for a given
(config, seed).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as glio
from . import rng
from .algebra import QuadratureSpec, as_kernel, ceil_to_multiple, cell_means, midpoints, power
from .core import StepGraphon, canonical_graphon, cell_index, constant, validate_graphon
from .errors import QuadratureError, ValidationError
from .norms import cut_norm_auto
from .sampling import SamplerConfig, sample_graph, sample_latents, expected_graphon

_TAG_SWEEP_GRAPH = 5
_TAG_SWEEP_CUT = 6
_TAG_CE_DRAW = 7
_TAG_CE_CUT = 8

_SHARED_ALIGN_CAP = 2048
_SWEEP_RESTARTS = 50


@dataclass(frozen=True)
class SweepRow:
    n: int
    l1_expected_vs_limit: Optional[float]
    l1_sampled_vs_limit: Optional[float]
    cutnorm_sampled_vs_limit: Optional[float]
    wall_time: float = field(default=0.0, compare=False)


@dataclass
class ConvergenceReport:
    label: str
    kind: str
    k: int
    seed: int
    quadrature: QuadratureSpec
    rows: list
    incomplete: bool = False

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if ns != sorted(set(ns)):
            raise ValidationError("rows must be sorted by strictly increasing n")
        for r in self.rows:
            for v in (r.l1_expected_vs_limit, r.l1_sampled_vs_limit, r.cutnorm_sampled_vs_limit):
                if v is not None and v < 0:
                    raise ValidationError(f"negative distance in row n={r.n}")


def _step_power_values(values: np.ndarray, k: int) -> np.ndarray:
    n = values.shape[0]
    p = np.linalg.matrix_power(values, k) / float(n) ** (k - 1)
    return 0.5 * (p + p.T)


class _LimitDistance:
    """Shared machinery for L1 distances from n-step matrices to the limit.

    When the limit power is itself a step function the distance is exact
    matrix arithmetic. Otherwise limit values are evaluated on midpoint grids
    aligned to every swept n (so one cache level serves the whole sweep) and
    refined per comparison until the estimate settles within tol.
    """

    def __init__(self, w, k: int, ns, q: QuadratureSpec):
        self.q = q
        self.kw = as_kernel(power(w, k, q))
        self.limit_step = self.kw.step_form()
        self.cache = {}
        if self.limit_step is None:
            lip = getattr(w, "lipschitz", None) or 1.0
            sup = getattr(w, "sup_bound", 1.0)
            self.tol = min(q.tol, (math.sqrt(2.0) * lip + sup) / (10.0 * max(ns)))
            lcm_all = math.lcm(*ns)
            self.shared_align = lcm_all if lcm_all <= _SHARED_ALIGN_CAP else None

    def _limit_at(self, g: int) -> np.ndarray:
        if g not in self.cache:
            mids = midpoints(g)
            self.cache[g] = self.kw.eval_grid(mids, mids, g)
        return self.cache[g]

    def distance(self, step_values: np.ndarray, n: int) -> float:
        if self.limit_step is not None:
            s = self.limit_step
            m = math.lcm(n, s.n)
            a = np.kron(step_values, np.ones((m // n, m // n)))
            b = s.refine(m // s.n).values
            return float(np.abs(a - b).mean())
        align = self.shared_align or n
        g0 = ceil_to_multiple(self.q.base_grid, align)
        prev = None
        for r in range(self.q.max_refinements + 1):
            g = g0 << r
            lim = self._limit_at(g)
            idx = cell_index(midpoints(g), n)
            cur = float(np.abs(step_values[np.ix_(idx, idx)] - lim).mean())
            if prev is not None and abs(cur - prev) <= self.tol:
                return cur
            prev = cur
        raise QuadratureError(
            f"limit distance at n={n} did not settle within tol={self.tol}",
            last_estimates=(prev, cur),
        )

    def limit_cells(self, n: int) -> np.ndarray:
        """Cell averages of the limit power on the n-grid."""
        if self.limit_step is not None:
            return cell_means(self.kw, n, self.q)
        levels = [g for g in self.cache if g % n == 0]
        if not levels:
            return cell_means(self.kw, n, self.q)
        g = max(levels)
        cells = self._limit_at(g).reshape(n, g // n, n, g // n).mean(axis=(1, 3))
        return 0.5 * (cells + cells.T)


def _sorted_ns(ns) -> list:
    out = sorted({int(n) for n in ns})
    if not out:
        raise ValidationError("empty sweep")
    return out


def run_theorem_sweep(
    w, k: int, ns, q: QuadratureSpec = QuadratureSpec(), seed: int = 0
) -> ConvergenceReport:
    """Record e_n plus one-draw sampled distances for each n."""
    ns = _sorted_ns(ns)
    if ns[0] < 2:
        raise ValidationError("theorem sweep needs every n >= 2")
    if k < 1:
        raise ValidationError("power k must be >= 1")
    validate_graphon(w, samples=512, seed=seed).raise_if_failed()
    dist = _LimitDistance(w, k, ns, q)
    rows = []
    incomplete = False
    for n in ns:
        t0 = time.perf_counter()
        try:
            expected = expected_graphon(w, n, q)
            ek = _step_power_values(expected.step.values, k)
            e_n = dist.distance(ek, n)

            cfg = SamplerConfig(n, rng.derive_key(seed, _TAG_SWEEP_GRAPH, n), w)
            adj = canonical_graphon(sample_graph(cfg, sample_latents(cfg))).values
            ak = _step_power_values(adj, k)
            l1_sampled = dist.distance(ak, n)

            diff = np.clip(ak - dist.limit_cells(n), -1.0, 1.0)
            signed = StepGraphon(n, 0.5 * (diff + diff.T), -1.0, 1.0)
            cut = cut_norm_auto(
                signed, restarts=_SWEEP_RESTARTS, seed=rng.derive_key(seed, _TAG_SWEEP_CUT, n)
            ).value
        except QuadratureError:
            incomplete = True
            break
        rows.append(SweepRow(n, e_n, l1_sampled, cut, time.perf_counter() - t0))
    label = getattr(w, "label", "graphon")
    return ConvergenceReport(
        label=label, kind="theorem", k=k, seed=seed, quadrature=q, rows=rows,
        incomplete=incomplete,
    )


def run_counterexample_sweep(
    p: float, ns, draws_per_n: int, seed: int = 0, q: QuadratureSpec = QuadratureSpec()
) -> ConvergenceReport:
    """Sampled ER graphons: L1 distance stays put while the cut norm decays.

    Per draw, the L1 distance of the canonical graphon to constant(p) is the
    exact cell sum; the cut norm of the signed difference is exact within the
    enumeration budget. The expected-graphon column carries its closed form
    p/n (only the zeroed diagonal differs from the constant limit).
    """
    if not (0.0 < p < 1.0):
        raise ValidationError("counterexample level p must lie in (0, 1)")
    if draws_per_n < 1:
        raise ValidationError("draws_per_n must be >= 1")
    ns = _sorted_ns(ns)
    w = constant(p)
    rows = []
    for n in ns:
        t0 = time.perf_counter()
        l1s = np.empty(draws_per_n)
        cuts = np.empty(draws_per_n)
        for d in range(draws_per_n):
            sub = rng.derive_key(seed, _TAG_CE_DRAW, n, d)
            cfg = SamplerConfig(n, sub, w)
            adj = canonical_graphon(sample_graph(cfg, sample_latents(cfg))).values
            l1s[d] = float(np.abs(adj - p).mean())
            signed = StepGraphon(n, adj - p, -1.0, 1.0)
            cuts[d] = cut_norm_auto(
                signed, restarts=_SWEEP_RESTARTS, seed=rng.derive_key(sub, _TAG_CE_CUT)
            ).value
        rows.append(
            SweepRow(n, p / n, float(np.mean(l1s)), float(np.mean(cuts)),
                     time.perf_counter() - t0)
        )
    return ConvergenceReport(
        label=f"er(p={p:g})", kind="counterexample", k=1, seed=seed, quadrature=q, rows=rows
    )


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

_CSV_HEADER = "n,l1_expected_vs_limit,l1_sampled_vs_limit,cutnorm_sampled_vs_limit"
_FORMATS = ("csv", "json", "svg")


def report_to_dict(r: ConvergenceReport) -> dict:
    return {
        "label": r.label,
        "kind": r.kind,
        "k": r.k,
        "seed": r.seed,
        "incomplete": r.incomplete,
        "quadrature": {
            "base_grid": r.quadrature.base_grid,
            "max_refinements": r.quadrature.max_refinements,
            "tol": r.quadrature.tol,
        },
        "rows": [
            {
                "n": row.n,
                "l1_expected_vs_limit": row.l1_expected_vs_limit,
                "l1_sampled_vs_limit": row.l1_sampled_vs_limit,
                "cutnorm_sampled_vs_limit": row.cutnorm_sampled_vs_limit,
            }
            for row in r.rows
        ],
    }


def report_from_dict(doc: dict) -> ConvergenceReport:
    qd = doc["quadrature"]
    rows = [
        SweepRow(
            n=row["n"],
            l1_expected_vs_limit=row["l1_expected_vs_limit"],
            l1_sampled_vs_limit=row["l1_sampled_vs_limit"],
            cutnorm_sampled_vs_limit=row["cutnorm_sampled_vs_limit"],
        )
        for row in doc["rows"]
    ]
    return ConvergenceReport(
        label=doc["label"],
        kind=doc["kind"],
        k=doc["k"],
        seed=doc["seed"],
        quadrature=QuadratureSpec(qd["base_grid"], qd["max_refinements"], qd["tol"]),
        rows=rows,
        incomplete=doc.get("incomplete", False),
    )


def load_report(path) -> ConvergenceReport:
    return report_from_dict(json.loads(Path(path).read_text()))


def _csv_cell(v: Optional[float]) -> str:
    return "" if v is None else glio.fmt_float(v)


def emit_report(report: ConvergenceReport, out, formats=("csv", "json")) -> dict:
    """Write the report next to `out` (base path, extension per format)."""
    if not report.rows:
        raise ValidationError("empty sweep")
    bad = set(formats) - set(_FORMATS)
    if bad:
        raise ValidationError(f"unknown report formats {sorted(bad)}")
    base = glio.resolve_out(out)
    written = {}
    if "csv" in formats:
        lines = [_CSV_HEADER]
        for row in report.rows:
            lines.append(
                ",".join(
                    [
                        str(row.n),
                        _csv_cell(row.l1_expected_vs_limit),
                        _csv_cell(row.l1_sampled_vs_limit),
                        _csv_cell(row.cutnorm_sampled_vs_limit),
                    ]
                )
            )
        path = base.with_suffix(".csv")
        path.write_text("\n".join(lines) + "\n")
        written["csv"] = path
    if "json" in formats:
        path = base.with_suffix(".json")
        path.write_text(json.dumps(report_to_dict(report), indent=2) + "\n")
        written["json"] = path
    if "svg" in formats:
        path = base.with_suffix(".svg")
        path.write_text(render_svg(report))
        written["svg"] = path
    return written


# ---------------------------------------------------------------------------
# SVG log-log chart (self-contained, no plotting dependency)
# ---------------------------------------------------------------------------

_SVG_W, _SVG_H = 640, 440
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 36, 56

_SERIES = (
    ("l1_expected_vs_limit", "expected vs limit (L1)", "#1f77b4"),
    ("l1_sampled_vs_limit", "sampled vs limit (L1)", "#d62728"),
    ("cutnorm_sampled_vs_limit", "sampled vs limit (cut)", "#2ca02c"),
)


def render_svg(report: ConvergenceReport) -> str:
    pts = {name: [] for name, _, _ in _SERIES}
    for row in report.rows:
        for name, _, _ in _SERIES:
            v = getattr(row, name)
            if v is not None and v > 0.0:
                pts[name].append((row.n, v))
    ns = [row.n for row in report.rows]
    values = [v for series in pts.values() for _, v in series]
    if not values:
        values = [1.0]
    lx0, lx1 = math.log10(min(ns)), math.log10(max(ns))
    ref = None
    if pts["l1_expected_vs_limit"]:
        n0, v0 = pts["l1_expected_vs_limit"][0]
        ref = [(n, v0 * n0 / n) for n in ns]
        values.extend(v for _, v in ref)
    ly0, ly1 = math.log10(min(values)), math.log10(max(values))
    if lx1 - lx0 < 1e-9:
        lx1 = lx0 + 1.0
    if ly1 - ly0 < 1e-9:
        ly1 = ly0 + 1.0
    plot_w = _SVG_W - _MARGIN_L - _MARGIN_R
    plot_h = _SVG_H - _MARGIN_T - _MARGIN_B

    def sx(n):
        return _MARGIN_L + (math.log10(n) - lx0) / (lx1 - lx0) * plot_w

    def sy(v):
        return _MARGIN_T + (ly1 - math.log10(v)) / (ly1 - ly0) * plot_h

    def poly(series):
        return " ".join(f"{sx(n):.2f},{sy(v):.2f}" for n, v in series)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}" font-family="monospace" font-size="12">',
        f'<rect x="0" y="0" width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333"/>',
        f'<text x="{_MARGIN_L}" y="{_MARGIN_T - 12}">{report.kind} sweep: '
        f'{report.label}, k={report.k} (log-log)</text>',
    ]
    for n in ns:
        x = sx(n)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_T + plot_h}" x2="{x:.2f}" '
            f'y2="{_MARGIN_T + plot_h + 5}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_MARGIN_T + plot_h + 20}" text-anchor="middle">{n}</text>'
        )
    decade = math.floor(ly0)
    while decade <= math.ceil(ly1):
        v = 10.0**decade
        if ly0 <= decade <= ly1:
            y = sy(v)
            parts.append(
                f'<line x1="{_MARGIN_L - 5}" y1="{y:.2f}" x2="{_MARGIN_L}" y2="{y:.2f}" '
                'stroke="#333"/>'
            )
            parts.append(
                f'<text x="{_MARGIN_L - 8}" y="{y + 4:.2f}" text-anchor="end">1e{decade}</text>'
            )
        decade += 1
    if ref is not None:
        parts.append(
            f'<polyline points="{poly(ref)}" fill="none" stroke="#999" '
            'stroke-dasharray="6,4"/>'
        )
    legend_y = _MARGIN_T + 14
    for name, title, color in _SERIES:
        if not pts[name]:
            continue
        parts.append(
            f'<polyline points="{poly(pts[name])}" fill="none" stroke="{color}" '
            'stroke-width="1.6"/>'
        )
        for n, v in pts[name]:
            parts.append(f'<circle cx="{sx(n):.2f}" cy="{sy(v):.2f}" r="2.4" fill="{color}"/>')
        parts.append(
            f'<text x="{_MARGIN_L + plot_w - 8}" y="{legend_y}" text-anchor="end" '
            f'fill="{color}">{title}</text>'
        )
        legend_y += 16
    if ref is not None:
        parts.append(
            f'<text x="{_MARGIN_L + plot_w - 8}" y="{legend_y}" text-anchor="end" '
            'fill="#999">reference 1/n</text>'
        )
    parts.append(f'<text x="{_MARGIN_L + plot_w // 2}" y="{_SVG_H - 16}" '
                 'text-anchor="middle">n (blocks / vertices)</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
