"""Aligned rank transform ANOVA and the F-distribution tail probability.

The alignment step uses the factorial means decomposition: for each effect,
every other estimated effect is stripped from the data, leaving residuals
plus the effect of interest. The aligned values are midranked and a standard
fixed-effects ANOVA runs on the ranks; only the aligned-for effect's row is
reported. Exactness of the decomposition (stripped effects vanishing, aligned
values summing to zero) holds for balanced designs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import StatsError
from .ranking import midranks

_BETACF_MAX_ITER = 400
_BETACF_EPS = 1e-15
_BETACF_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz iteration."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_TINY:
        d = _BETACF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        numer = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numer * d
        if abs(d) < _BETACF_TINY:
            d = _BETACF_TINY
        c = 1.0 + numer / c
        if abs(c) < _BETACF_TINY:
            c = _BETACF_TINY
        d = 1.0 / d
        h *= d * c
        numer = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numer * d
        if abs(d) < _BETACF_TINY:
            d = _BETACF_TINY
        c = 1.0 + numer / c
        if abs(c) < _BETACF_TINY:
            c = _BETACF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise StatsError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise StatsError(f"beta parameters must be positive, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the continued fraction on whichever side converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f_value: float, df_num: float, df_den: float) -> float:
    """P(F > f_value) for an F(df_num, df_den) variate."""
    if df_num < 1 or df_den < 1:
        raise StatsError(f"degrees of freedom must be >= 1, got ({df_num}, {df_den})")
    if f_value < 0:
        raise StatsError(f"F statistic must be non-negative, got {f_value}")
    if math.isinf(f_value):
        return 0.0
    x = df_den / (df_den + df_num * f_value)
    return betainc(df_den / 2.0, df_num / 2.0, x)


def f_cdf(f_value: float, df_num: float, df_den: float) -> float:
    """P(F <= f_value), evaluated on the complementary beta tail."""
    if df_num < 1 or df_den < 1:
        raise StatsError(f"degrees of freedom must be >= 1, got ({df_num}, {df_den})")
    if f_value < 0:
        raise StatsError(f"F statistic must be non-negative, got {f_value}")
    if math.isinf(f_value):
        return 1.0
    x = df_num * f_value / (df_den + df_num * f_value)
    return betainc(df_num / 2.0, df_den / 2.0, x)


@dataclass(frozen=True)
class AnovaTable:
    effect: str
    F: float
    df_num: int
    df_den: int
    p: float

    def to_dict(self) -> dict:
        return {
            "effect": self.effect,
            "F": self.F,
            "df_num": self.df_num,
            "df_den": self.df_den,
            "p": self.p,
        }


Observation = tuple[float, Mapping[str, str]]


class _Design:
    """Factor layout shared by alignment and the rank ANOVA."""

    def __init__(self, observations: Sequence[Observation]):
        if not observations:
            raise StatsError("no observations")
        self.values = [float(v) for v, _ in observations]
        self.factors = sorted(observations[0][1].keys())
        if not self.factors:
            raise StatsError("observations carry no factors")
        self.level_rows: list[tuple[str, ...]] = []
        for v, fmap in observations:
            if sorted(fmap.keys()) != self.factors:
                raise StatsError(
                    f"inconsistent factors: expected {self.factors}, got {sorted(fmap.keys())}"
                )
            self.level_rows.append(tuple(str(fmap[f]) for f in self.factors))
        self.levels = {
            f: sorted({row[i] for row in self.level_rows})
            for i, f in enumerate(self.factors)
        }
        for f, lv in self.levels.items():
            if len(lv) < 2:
                raise StatsError(f"factor {f!r} has a single level {lv[0]!r}")
        present = set(self.level_rows)
        for combo in itertools.product(*(self.levels[f] for f in self.factors)):
            if combo not in present:
                cell = ", ".join(f"{f}={l}" for f, l in zip(self.factors, combo))
                raise StatsError(f"empty cell in factorial design: {cell}")
        self.n = len(self.values)
        self.n_cells = math.prod(len(self.levels[f]) for f in self.factors)
        # Effects: all non-empty factor subsets, mains first, then interactions.
        idx = range(len(self.factors))
        self.effects: list[tuple[int, ...]] = [
            combo
            for size in range(1, len(self.factors) + 1)
            for combo in itertools.combinations(idx, size)
        ]

    def effect_name(self, effect: tuple[int, ...]) -> str:
        return ":".join(self.factors[i] for i in effect)

    def _subset_means(self, values: Sequence[float]) -> dict[tuple[int, ...], dict]:
        """Group means for every factor subset, the grand mean at the empty subset."""
        means: dict[tuple[int, ...], dict] = {}
        all_subsets = [()] + [
            combo
            for size in range(1, len(self.factors) + 1)
            for combo in itertools.combinations(range(len(self.factors)), size)
        ]
        for subset in all_subsets:
            sums: dict[tuple[str, ...], float] = {}
            counts: dict[tuple[str, ...], int] = {}
            for row, v in zip(self.level_rows, values):
                key = tuple(row[i] for i in subset)
                sums[key] = sums.get(key, 0.0) + v
                counts[key] = counts.get(key, 0) + 1
            means[subset] = {k: sums[k] / counts[k] for k in sums}
        return means

    def effect_estimates(
        self, values: Sequence[float], means: dict | None = None
    ) -> dict[tuple[int, ...], list[float]]:
        """Per-observation estimate of every effect via inclusion-exclusion."""
        if means is None:
            means = self._subset_means(values)
        out: dict[tuple[int, ...], list[float]] = {}
        for effect in self.effects:
            est = []
            for row in self.level_rows:
                acc = 0.0
                for r in range(len(effect) + 1):
                    sign = (-1.0) ** (len(effect) - r)
                    for sub in itertools.combinations(effect, r):
                        acc += sign * means[sub][tuple(row[i] for i in sub)]
                est.append(acc)
            out[effect] = est
        return out

    def residuals(self, values: Sequence[float], means: dict | None = None) -> list[float]:
        if means is None:
            means = self._subset_means(values)
        full = tuple(range(len(self.factors)))
        return [v - means[full][row] for row, v in zip(self.level_rows, values)]

    def anova(self, values: Sequence[float]) -> dict[tuple[int, ...], AnovaTable]:
        """Fixed-effects factorial ANOVA of ``values`` over this design."""
        df_den = self.n - self.n_cells
        if df_den <= 0:
            raise StatsError(
                f"no residual degrees of freedom (n={self.n}, cells={self.n_cells})"
            )
        means = self._subset_means(values)
        estimates = self.effect_estimates(values, means)
        resid = self.residuals(values, means)
        ss_err = sum(r * r for r in resid)
        ms_err = ss_err / df_den
        out: dict[tuple[int, ...], AnovaTable] = {}
        for effect in self.effects:
            ss = sum(e * e for e in estimates[effect])
            df_num = math.prod(len(self.levels[self.factors[i]]) - 1 for i in effect)
            if ms_err == 0.0:
                f_stat = 0.0 if ss == 0.0 else math.inf
            else:
                f_stat = (ss / df_num) / ms_err
            out[effect] = AnovaTable(
                effect=self.effect_name(effect),
                F=f_stat,
                df_num=df_num,
                df_den=df_den,
                p=f_sf(f_stat, df_num, df_den),
            )
        return out


def _as_observations(observations: Iterable[Observation]) -> list[Observation]:
    return [(float(v), dict(fmap)) for v, fmap in observations]


def factorial_anova(observations: Iterable[Observation]) -> list[AnovaTable]:
    """Plain fixed-effects ANOVA on the raw values, one row per effect."""
    obs = _as_observations(observations)
    design = _Design(obs)
    tables = design.anova(design.values)
    return [tables[e] for e in design.effects]


def align_for_effect(observations: Iterable[Observation], effect: str | Sequence[str]) -> list[float]:
    """Aligned values for one effect: residuals plus that effect's estimate.

    ``effect`` is a factor name, a ':'-joined interaction name, or a sequence
    of factor names.
    """
    obs = _as_observations(observations)
    design = _Design(obs)
    if isinstance(effect, str):
        wanted = tuple(sorted(effect.split(":")))
    else:
        wanted = tuple(sorted(effect))
    target = None
    for eff in design.effects:
        if tuple(sorted(design.factors[i] for i in eff)) == wanted:
            target = eff
            break
    if target is None:
        raise StatsError(f"unknown effect {effect!r}; factors are {design.factors}")
    means = design._subset_means(design.values)
    estimates = design.effect_estimates(design.values, means)[target]
    resid = design.residuals(design.values, means)
    return [r + e for r, e in zip(resid, estimates)]


def art_anova(observations: Iterable[Observation]) -> list[AnovaTable]:
    """Aligned rank transform ANOVA: one table per effect.

    For each effect the data is aligned (all other effects stripped),
    midranked, and run through the factorial ANOVA; the reported row is the
    aligned-for effect's F, degrees of freedom, and upper-tail p.
    """
    obs = _as_observations(observations)
    design = _Design(obs)
    means = design._subset_means(design.values)
    estimates = design.effect_estimates(design.values, means)
    resid = design.residuals(design.values, means)
    out: list[AnovaTable] = []
    for effect in design.effects:
        aligned = [r + e for r, e in zip(resid, estimates[effect])]
        ranks = midranks(aligned)
        out.append(design.anova(ranks)[effect])
    return out
