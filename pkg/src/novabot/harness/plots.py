"""Deterministic hand-written SVG charts of the summary tables.

Output depends only on the summary values: coordinates are printed with a
fixed number of decimals and series are drawn in sorted method order.
"""
from __future__ import annotations

import math
import os
from xml.sax.saxutils import escape

import numpy as np

from novabot.harness.summarize import Summary, method_label

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _n(x) -> str:
    return f"{x:.2f}"


def _nice_ticks(lo, hi, count=5):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    if ticks[-1] < hi:
        ticks.append(round(t, 10))
    return ticks


class Chart:
    def __init__(self, title, xlabel, ylabel, xrange, yrange):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.xt = _nice_ticks(*xrange)
        self.yt = _nice_ticks(*yrange)
        self.x0, self.x1 = self.xt[0], self.xt[-1]
        self.y0, self.y1 = self.yt[0], self.yt[-1]
        self.body = []
        self.legend = []

    def px(self, x):
        return LEFT + (x - self.x0) / ((self.x1 - self.x0) or 1.0) * (W - LEFT - RIGHT)

    def py(self, y):
        return H - BOTTOM - (y - self.y0) / ((self.y1 - self.y0) or 1.0) * (H - TOP - BOTTOM)

    def polyline(self, xs, ys, color, label, dash=None):
        pts = " ".join(f"{_n(self.px(x))},{_n(self.py(y))}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.body.append(f'<polyline class="series" data-label="{escape(label)}" fill="none" '
                         f'stroke="{color}" stroke-width="2"{extra} points="{pts}"/>')
        for x, y in zip(xs, ys):
            self.body.append(f'<circle cx="{_n(self.px(x))}" cy="{_n(self.py(y))}" r="2.5" '
                             f'fill="{color}"/>')
        self.legend.append((label, color))

    def rect(self, x, y, w, h, color, opacity=0.8):
        self.body.append(f'<rect x="{_n(x)}" y="{_n(y)}" width="{_n(w)}" height="{_n(h)}" '
                         f'fill="{color}" fill-opacity="{opacity}" stroke="#333"/>')

    def line(self, x1, y1, x2, y2, color="#333", width=1):
        self.body.append(f'<line x1="{_n(x1)}" y1="{_n(y1)}" x2="{_n(x2)}" y2="{_n(y2)}" '
                         f'stroke="{color}" stroke-width="{width}"/>')

    def render(self, xtick_labels=None) -> str:
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
               f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
               '<rect width="100%" height="100%" fill="white"/>',
               f'<text x="{W / 2:.2f}" y="22" text-anchor="middle" font-size="14">'
               f'{escape(self.title)}</text>']
        xa, ya = H - BOTTOM, LEFT
        out.append(f'<line x1="{LEFT}" y1="{xa}" x2="{W - RIGHT}" y2="{xa}" stroke="black"/>')
        out.append(f'<line x1="{ya}" y1="{TOP}" x2="{ya}" y2="{xa}" stroke="black"/>')
        labels = xtick_labels or [(t, f"{t:g}") for t in self.xt]
        for t, text in labels:
            x = _n(self.px(t))
            out.append(f'<line x1="{x}" y1="{xa}" x2="{x}" y2="{xa + 4}" stroke="black"/>')
            out.append(f'<text x="{x}" y="{xa + 16}" text-anchor="middle">{escape(text)}</text>')
        for t in self.yt:
            y = _n(self.py(t))
            out.append(f'<line x1="{ya - 4}" y1="{y}" x2="{ya}" y2="{y}" stroke="black"/>')
            out.append(f'<text x="{ya - 7}" y="{y}" text-anchor="end" dy="4">{t:g}</text>')
        out.append(f'<text x="{(LEFT + W - RIGHT) / 2:.2f}" y="{H - 12}" text-anchor="middle">'
                   f'{escape(self.xlabel)}</text>')
        cy = (TOP + H - BOTTOM) / 2
        out.append(f'<text x="16" y="{cy:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {cy:.2f})">{escape(self.ylabel)}</text>')
        out.extend(self.body)
        for k, (label, color) in enumerate(self.legend):
            y = TOP + 14 * k
            out.append(f'<rect x="{W - RIGHT + 12}" y="{y}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{W - RIGHT + 26}" y="{y + 9}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _range(values, pad=0.05):
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return (0.0, 1.0)
    lo, hi = min(vals), max(vals)
    span = (hi - lo) or max(abs(hi), 1.0)
    return (lo - pad * span, hi + pad * span)


def _median_curves(s: Summary, column: int):
    """method -> (generations, median over populations)."""
    per = {}
    for row in s.curves:
        per.setdefault((row[0], row[1]), {}).setdefault(row[3], []).append(row[column])
    out = {}
    for m in s.methods:
        if m not in per:
            continue
        gens = sorted(per[m])
        out[m] = (gens, [float(np.median(per[m][g])) for g in gens])
    return out


def curve_chart(s: Summary, column: int, title: str, ylabel: str) -> str:
    curves = _median_curves(s, column)
    xs = [g for gens, _ in curves.values() for g in gens]
    ys = [y for _, vals in curves.values() for y in vals]
    chart = Chart(title, "generation", ylabel, _range(xs, 0) if xs else (0, 1), _range(ys))
    for k, (m, (gens, vals)) in enumerate(curves.items()):
        chart.polyline(gens, vals, PALETTE[k % len(PALETTE)], method_label(*m))
    return chart.render()


def _stat(s: Summary, quantity):
    return {(r[0], r[1]): r for r in s.stats if r[2] == quantity}


def sweep_chart(s: Summary) -> str:
    g4, overall = _stat(s, "best_gen4"), _stat(s, "best_overall")
    hybrid = sorted(t for m, t in s.methods if m == "hybrid")
    ga_vals = [r[4] for k, r in {**g4, **overall}.items() if k[0] == "ga"]
    ys = [g4[("hybrid", t)][4] for t in hybrid if ("hybrid", t) in g4]
    ys += [overall[("hybrid", t)][4] for t in hybrid if ("hybrid", t) in overall] + ga_vals
    chart = Chart("s_thr sweep (median over populations)", "s_thr", "best rcc",
                  _range(hybrid, 0.05) if hybrid else (0, 1), _range(ys))
    for k, (name, table) in enumerate((("best up to gen 4", g4), ("best overall", overall))):
        pts = [(t, table[("hybrid", t)][4]) for t in hybrid if ("hybrid", t) in table]
        if pts:
            chart.polyline([p[0] for p in pts], [p[1] for p in pts], PALETTE[k], f"hybrid {name}")
        if ("ga", None) in table and hybrid:
            v = table[("ga", None)][4]
            chart.polyline([chart.x0, chart.x1], [v, v], PALETTE[k], f"GA {name}", dash="6,4")
    return chart.render()


def bars_chart(s: Summary) -> str:
    g4, overall = _stat(s, "best_gen4"), _stat(s, "best_overall")
    methods = [m for m in s.methods if m in g4 or m in overall]
    ys = [r[4] for r in g4.values()] + [r[4] for r in overall.values()]
    chart = Chart("best up to generation 4 vs all generations (median)", "method", "best rcc",
                  (0, max(len(methods), 1)), (0.0, max(ys) * 1.05 if ys else 1.0))
    slot = (chart.px(1) - chart.px(0)) if methods else 0
    for k, m in enumerate(methods):
        for j, (table, color) in enumerate(((g4, PALETTE[0]), (overall, PALETTE[1]))):
            if m not in table:
                continue
            v = table[m][4]
            x = chart.px(k) + slot * (0.15 + 0.35 * j)
            chart.rect(x, chart.py(v), slot * 0.33, chart.py(0.0) - chart.py(v), color)
    if methods:
        chart.legend = [("best up to gen 4", PALETTE[0]), ("best overall", PALETTE[1])]
    ticks = [(k + 0.5, method_label(*m)) for k, m in enumerate(methods)]
    return chart.render(ticks or [(0, "")])


def box_chart(s: Summary) -> str:
    groups = {}
    for m, t, pop, g4, overall in s.best:
        groups.setdefault((m, t), ([], []))
        if math.isfinite(g4):
            groups[(m, t)][0].append(g4)
        groups[(m, t)][1].append(overall)
    methods = [m for m in s.methods if m in groups]
    ys = [v for a, b in groups.values() for v in a + b]
    chart = Chart("best rcc across initial populations", "method", "best rcc",
                  (0, max(len(methods), 1)), _range(ys))
    slot = (chart.px(1) - chart.px(0)) if methods else 0
    for k, m in enumerate(methods):
        for j, (vals, color) in enumerate(zip(groups[m], PALETTE[:2])):
            if not vals:
                continue
            q1, med, q3 = (float(v) for v in np.percentile(vals, [25, 50, 75]))
            lo, hi = min(vals), max(vals)
            x = chart.px(k) + slot * (0.15 + 0.35 * j)
            w = slot * 0.3
            cx = x + w / 2
            chart.line(cx, chart.py(lo), cx, chart.py(q1))
            chart.line(cx, chart.py(q3), cx, chart.py(hi))
            chart.rect(x, chart.py(q3), w, max(chart.py(q1) - chart.py(q3), 0.5), color, 0.5)
            chart.line(x, chart.py(med), x + w, chart.py(med), "black", 2)
    if methods:
        chart.legend = [("best up to gen 4", PALETTE[0]), ("best overall", PALETTE[1])]
    ticks = [(k + 0.5, method_label(*m)) for k, m in enumerate(methods)]
    return chart.render(ticks or [(0, "")])


def render_all(s: Summary) -> dict:
    return {
        "curves_best.svg": curve_chart(s, 6, "best rcc so far per generation (median)", "best rcc"),
        "curves_mean.svg": curve_chart(s, 4, "mean rcc of evaluated batch per generation (median)",
                                       "mean rcc"),
        "sweep.svg": sweep_chart(s),
        "gen4_vs_all.svg": bars_chart(s),
        "boxplots.svg": box_chart(s),
    }


def emit_plots(s: Summary, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, text in render_all(s).items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        paths.append(path)
    return paths
