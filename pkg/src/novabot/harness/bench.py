"""Paired comparison of hybrid runs against the plain GA on shared
initial populations, with a one-sided sign test."""
from __future__ import annotations

import math
from dataclasses import dataclass

from novabot.harness.summarize import GEN4_WINDOW


def sign_test_p(wins: int, losses: int) -> float:
    """One-sided P(X >= wins) for X ~ Binomial(wins + losses, 1/2); ties
    are dropped before calling."""
    n = wins + losses
    if n == 0:
        return 1.0
    return sum(math.comb(n, k) for k in range(wins, n + 1)) / 2.0**n


def best_until(result, window: int = GEN4_WINDOW) -> float:
    """Lowest rcc among individuals evaluated up to generation ``window``."""
    return min(ind.rcc for ind in result.log.evaluated if ind.generation <= window)


@dataclass(frozen=True)
class PairedReport:
    s_thr: float
    pairs: int
    wins: int
    losses: int
    ties: int
    p_value: float

    @property
    def win_rate(self) -> float:
        return self.wins / self.pairs if self.pairs else 0.0

    def passes(self, min_rate: float = 0.6, alpha: float = 0.05) -> bool:
        return self.win_rate >= min_rate and self.p_value < alpha

    def line(self) -> str:
        return (f"s_thr={self.s_thr:g}: hybrid better in {self.wins}/{self.pairs} pairs "
                f"(losses {self.losses}, ties {self.ties}, win rate {self.win_rate:.2f}, "
                f"sign-test p={self.p_value:.4g})")


def paired_reports(results, window: int = GEN4_WINDOW) -> list[PairedReport]:
    ga = {r.pop_index: best_until(r, window) for r in results if r.method.name == "ga"}
    hybrid = {}
    for r in results:
        if r.method.name == "hybrid":
            hybrid.setdefault(r.method.s_thr, {})[r.pop_index] = best_until(r, window)
    reports = []
    for s_thr in sorted(hybrid):
        wins = losses = ties = 0
        for pop, h in sorted(hybrid[s_thr].items()):
            if pop not in ga:
                continue
            if h < ga[pop]:
                wins += 1
            elif h > ga[pop]:
                losses += 1
            else:
                ties += 1
        reports.append(PairedReport(s_thr, wins + losses + ties, wins, losses, ties,
                                    sign_test_p(wins, losses)))
    return reports
