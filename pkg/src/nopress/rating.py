"""Multiplayer TrueSkill rating update.

Free-for-all games are modeled as a chain of pairwise comparison
factors between rank-adjacent players (teams of one), with truncated
Gaussian moment matching at each comparison and Gaussian message
passing over the chain until convergence. Parameters follow the
canonical defaults: mu 25, sigma 25/3, beta sigma/2, tau sigma/100,
draw probability 0.10; ties are handled through the draw margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import norm

MU = 25.0
SIGMA = MU / 3.0
BETA = SIGMA / 2.0
TAU = SIGMA / 100.0
DRAW_PROBABILITY = 0.10
_MIN_DELTA = 1e-4


@dataclass(frozen=True)
class Rating:
    mu: float = MU
    sigma: float = SIGMA

    @property
    def conservative(self) -> float:
        """mu - 3 sigma, the usual leaderboard statistic."""
        return self.mu - 3.0 * self.sigma


class _Gaussian:
    """Gaussian in precision form: pi = 1/sigma^2, tau = pi * mu."""

    __slots__ = ("pi", "tau")

    def __init__(self, pi=0.0, tau=0.0):
        self.pi = pi
        self.tau = tau

    @classmethod
    def from_mu_sigma(cls, mu, sigma):
        pi = 1.0 / (sigma * sigma)
        return cls(pi, pi * mu)

    @property
    def mu(self):
        return self.tau / self.pi if self.pi else 0.0

    @property
    def sigma(self):
        return math.sqrt(1.0 / self.pi) if self.pi else math.inf

    def __mul__(self, other):
        return _Gaussian(self.pi + other.pi, self.tau + other.tau)

    def __truediv__(self, other):
        return _Gaussian(self.pi - other.pi, self.tau - other.tau)

    def delta(self, other):
        return max(abs(self.tau - other.tau),
                   math.sqrt(abs(self.pi - other.pi)))


class _Variable:
    def __init__(self):
        self.value = _Gaussian()
        self.messages: dict[object, _Gaussian] = {}

    def set_message(self, factor, message: _Gaussian) -> float:
        old = self.messages.get(factor, _Gaussian())
        before = self.value
        self.messages[factor] = message
        self.value = before / old * message
        return self.value.delta(before)

    def set_value(self, factor, value: _Gaussian) -> float:
        """Replace the marginal, attributing the change to ``factor``."""
        old_msg = self.messages.get(factor, _Gaussian())
        before = self.value
        self.messages[factor] = value / (before / old_msg)
        self.value = value
        return value.delta(before)


def _v_win(t, eps):
    x = t - eps
    denom = norm.cdf(x)
    return norm.pdf(x) / denom if denom > 1e-300 else -x


def _w_win(t, eps):
    v = _v_win(t, eps)
    return v * (v + t - eps)


def _v_draw(t, eps):
    abs_t = abs(t)
    a, b = eps - abs_t, -eps - abs_t
    denom = norm.cdf(a) - norm.cdf(b)
    if denom < 1e-300:
        v = -t + (eps if t < 0 else -eps)
        return v if t < 0 else -abs(v)
    v = (norm.pdf(b) - norm.pdf(a)) / denom
    return -v if t < 0 else v

def _w_draw(t, eps):
    abs_t = abs(t)
    a, b = eps - abs_t, -eps - abs_t
    denom = norm.cdf(a) - norm.cdf(b)
    if denom < 1e-300:
        return 1.0
    v = _v_draw(abs_t, eps)
    return v * v + (a * norm.pdf(a) - b * norm.pdf(b)) / denom


def draw_margin(beta: float = BETA, draw_probability: float = DRAW_PROBABILITY,
                n_players: int = 2) -> float:
    return float(norm.ppf((draw_probability + 1) / 2.0)
                 * math.sqrt(n_players) * beta)


def rate(ratings: list[Rating], ranks: list[int],
         beta: float = BETA, tau: float = TAU,
         draw_probability: float = DRAW_PROBABILITY) -> list[Rating]:
    """Posterior ratings for one free-for-all game.

    ``ranks[i]`` is player i's finishing rank (lower is better; equal
    ranks are draws).
    """
    n = len(ratings)
    if n != len(ranks):
        raise ValueError("ratings and ranks length mismatch")
    if n < 2:
        return list(ratings)
    eps = draw_margin(beta, draw_probability)

    order = sorted(range(n), key=lambda i: ranks[i])
    skills = [_Variable() for _ in range(n)]
    perfs = [_Variable() for _ in range(n)]
    diffs = [_Variable() for _ in range(n - 1)]

    # prior -> skill (with dynamics) and skill -> performance (with beta)
    for i, r in enumerate(ratings):
        prior = _Gaussian.from_mu_sigma(r.mu, math.hypot(r.sigma, tau))
        skills[i].set_message(("prior", i), prior)
    like = [("like", i) for i in range(n)]

    def perf_down(i):
        msg = skills[i].value / skills[i].messages.get(("perf_up", i), _Gaussian())
        a = 1.0 / (1.0 + beta * beta * msg.pi)
        perfs[i].set_message(like[i], _Gaussian(a * msg.pi, a * msg.tau))

    def skill_up(i):
        msg = perfs[i].value / perfs[i].messages.get(like[i], _Gaussian())
        a = 1.0 / (1.0 + beta * beta * msg.pi)
        skills[i].set_message(("perf_up", i), _Gaussian(a * msg.pi, a * msg.tau))

    for i in range(n):
        perf_down(i)

    # chain of diff factors between rank-adjacent players
    pairs = [(order[k], order[k + 1]) for k in range(n - 1)]
    diff_factors = [("diff", k) for k in range(n - 1)]
    trunc_factors = [("trunc", k) for k in range(n - 1)]

    def diff_down(k):
        i, j = pairs[k]
        mi = perfs[i].value / perfs[i].messages.get(("diff_up_l", k), _Gaussian())
        mj = perfs[j].value / perfs[j].messages.get(("diff_up_r", k), _Gaussian())
        if mi.pi <= 0 or mj.pi <= 0:
            return
        var = 1.0 / mi.pi + 1.0 / mj.pi
        mu = mi.mu - mj.mu
        diffs[k].set_message(diff_factors[k],
                             _Gaussian.from_mu_sigma(mu, math.sqrt(var)))

    def trunc_up(k):
        i, j = pairs[k]
        drawn = ranks[i] == ranks[j]
        ctx = diffs[k].value / diffs[k].messages.get(trunc_factors[k],
                                                     _Gaussian())
        if ctx.pi <= 0:
            return 0.0
        sqrt_pi = math.sqrt(ctx.pi)
        t = ctx.tau / sqrt_pi
        e = eps * sqrt_pi
        v = _v_draw(t, e) if drawn else _v_win(t, e)
        w = _w_draw(t, e) if drawn else _w_win(t, e)
        denom = 1.0 - w
        if denom <= 1e-12:
            denom = 1e-12
        new = _Gaussian(ctx.pi / denom, (ctx.tau + sqrt_pi * v) / denom)
        return diffs[k].set_value(trunc_factors[k], new)

    def diff_up(k):
        i, j = pairs[k]
        md = diffs[k].value / diffs[k].messages.get(diff_factors[k], _Gaussian())
        mi = perfs[i].value / perfs[i].messages.get(("diff_up_l", k), _Gaussian())
        mj = perfs[j].value / perfs[j].messages.get(("diff_up_r", k), _Gaussian())
        if md.pi > 0 and mj.pi > 0:
            var = 1.0 / md.pi + 1.0 / mj.pi
            mu = md.mu + mj.mu
            perfs[i].set_message(("diff_up_l", k),
                                 _Gaussian.from_mu_sigma(mu, math.sqrt(var)))
        if md.pi > 0 and mi.pi > 0:
            var = 1.0 / md.pi + 1.0 / mi.pi
            mu = mi.mu - md.mu
            perfs[j].set_message(("diff_up_r", k),
                                 _Gaussian.from_mu_sigma(mu, math.sqrt(var)))

    for _ in range(60):
        max_delta = 0.0
        for k in range(n - 1):
            diff_down(k)
            max_delta = max(max_delta, trunc_up(k))
            diff_up(k)
        for k in reversed(range(n - 1)):
            diff_down(k)
            max_delta = max(max_delta, trunc_up(k))
            diff_up(k)
        if max_delta < _MIN_DELTA:
            break

    out = []
    for i in range(n):
        skill_up(i)
        g = skills[i].value
        out.append(Rating(float(g.mu), float(g.sigma)))
    return out
