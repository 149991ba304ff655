"""The ten test densities on [0, 1], with analytic derivatives and samplers."""

from dataclasses import dataclass
from math import comb, perm

import numpy as np
from numpy.polynomial.hermite_e import HermiteE
from scipy import stats
from scipy.special import beta as beta_fn
from scipy.special import ndtr, ndtri

from .asymptotics import TrueDensity

__all__ = ["ZOO_IDS", "ZooDensity", "get_density", "sample_zoo"]


class _BetaPart:
    """Beta(p, q) density with integer parameters.

    Derivatives use the Leibniz rule on the factored form ``x^(p-1) (1-x)^(q-1)``;
    an expanded power basis loses all precision near a zero of order 5.
    """

    def __init__(self, p, q):
        self.p, self.q = p, q
        self.norm = 1.0 / beta_fn(p, q)
        self.mean = p / (p + q)

    def derivative(self, k, x):
        x = np.asarray(x, dtype=float)
        a, b = self.p - 1, self.q - 1
        out = np.zeros_like(x)
        for j in range(k + 1):
            left = poch_falling(a, j)
            right = poch_falling(b, k - j)
            if left == 0 or right == 0:
                continue
            out += comb(k, j) * left * right * (-1) ** (k - j) * x ** (a - j) * (1 - x) ** (b - k + j)
        return self.norm * out

    def cdf(self, x):
        return stats.beta.cdf(x, self.p, self.q)

    def draw(self, rng, size):
        return rng.beta(self.p, self.q, size)


def poch_falling(a, j):
    """``a (a-1) ... (a-j+1)``; zero once a nonnegative integer ``a`` is exhausted."""
    return perm(a, j) if j <= a else 0


class _TruncExpPart:
    """Exponential with the given mean, truncated to [0, 1]."""

    def __init__(self, scale):
        self.rate = 1.0 / scale
        self.norm = 1.0 - np.exp(-self.rate)
        self.mean = 1.0 / self.rate - np.exp(-self.rate) / self.norm

    def derivative(self, k, x):
        x = np.asarray(x, dtype=float)
        return (-self.rate) ** k * self.rate * np.exp(-self.rate * x) / self.norm

    def cdf(self, x):
        return (1.0 - np.exp(-self.rate * np.asarray(x, dtype=float))) / self.norm

    def draw(self, rng, size):
        u = rng.random(size)
        return -np.log1p(-u * self.norm) / self.rate


class _TruncNormalPart:
    """N(mu, 1) truncated to [0, 1]."""

    def __init__(self, mu):
        self.mu = mu
        self.lo, self.hi = -mu, 1.0 - mu
        # right tail via survival function to keep precision when mu << 0
        self.mass = ndtr(-self.lo) - ndtr(-self.hi) if self.lo > 0 else ndtr(self.hi) - ndtr(self.lo)
        z = np.array([self.lo, self.hi])
        phi = np.exp(-0.5 * z**2) / np.sqrt(2 * np.pi)
        self.mean = mu + (phi[0] - phi[1]) / self.mass

    def derivative(self, k, x):
        t = np.asarray(x, dtype=float) - self.mu
        pdf = np.exp(-0.5 * t**2) / (np.sqrt(2 * np.pi) * self.mass)
        if k == 0:
            return pdf
        return (-1) ** k * HermiteE.basis(k)(t) * pdf

    def cdf(self, x):
        t = np.asarray(x, dtype=float) - self.mu
        if self.lo > 0:
            return (ndtr(-self.lo) - ndtr(-t)) / self.mass
        return (ndtr(t) - ndtr(self.lo)) / self.mass

    def draw(self, rng, size):
        u = rng.random(size)
        if self.lo > 0:
            tail = ndtr(-self.lo) - u * self.mass
            t = -ndtri(tail)
        else:
            t = ndtri(ndtr(self.lo) + u * self.mass)
        return np.clip(t + self.mu, 0.0, 1.0)


@dataclass(frozen=True)
class ZooDensity:
    """Finite mixture of the parts above; one component means no mixing."""

    id: str
    label: str
    weights: tuple
    parts: tuple

    def pdf(self, x):
        return self.derivative(0, x)

    __call__ = pdf

    def derivative(self, k, x):
        x = np.asarray(x, dtype=float)
        return sum(w * p.derivative(k, x) for w, p in zip(self.weights, self.parts))

    def cdf(self, x):
        return sum(w * p.cdf(x) for w, p in zip(self.weights, self.parts))

    @property
    def mean(self):
        return float(sum(w * p.mean for w, p in zip(self.weights, self.parts)))

    def true_density(self):
        derivs = [lambda x, k=k: self.derivative(k, x) for k in range(1, 5)]
        return TrueDensity(self.pdf, derivs, name=self.id)

    def sample(self, n, rng):
        """``n`` draws: pick components by weight, then draw within each."""
        if len(self.parts) == 1:
            return self.parts[0].draw(rng, n)
        comp = rng.choice(len(self.parts), size=n, p=self.weights)
        out = np.empty(n)
        for j, part in enumerate(self.parts):
            sel = comp == j
            out[sel] = part.draw(rng, int(sel.sum()))
        return out


def _beta(p, q):
    return _BetaPart(p, q)


_ZOO = {
    "a": ZooDensity("a", "Beta(3,5)", (1.0,), (_beta(3, 5),)),
    "b": ZooDensity("b", "Beta(1,6)", (1.0,), (_beta(1, 6),)),
    "c": ZooDensity("c", "Beta(3,1)", (1.0,), (_beta(3, 1),)),
    "d": ZooDensity("d", "0.5 Beta(3,9) + 0.5 Beta(9,3)", (0.5, 0.5), (_beta(3, 9), _beta(9, 3))),
    "e": ZooDensity("e", "0.5 Beta(3,1) + 0.5 Beta(10,10)", (0.5, 0.5), (_beta(3, 1), _beta(10, 10))),
    "f": ZooDensity("f", "0.5 Beta(1,6) + 0.5 Beta(3,5)", (0.5, 0.5), (_beta(1, 6), _beta(3, 5))),
    "g": ZooDensity("g", "0.5 Beta(2,1) + 0.5 Beta(1,4)", (0.5, 0.5), (_beta(2, 1), _beta(1, 4))),
    "h": ZooDensity("h", "Exp(mean 0.8) on [0,1]", (1.0,), (_TruncExpPart(0.8),)),
    "i": ZooDensity("i", "N(0,1) on [0,1]", (1.0,), (_TruncNormalPart(0.0),)),
    "j": ZooDensity(
        "j",
        "0.25 N(2,1) + 0.75 N(-3,1) on [0,1]",
        (0.25, 0.75),
        (_TruncNormalPart(2.0), _TruncNormalPart(-3.0)),
    ),
}

ZOO_IDS = tuple(_ZOO)


def get_density(density_id):
    try:
        return _ZOO[density_id]
    except KeyError:
        raise ValueError(f"unknown density {density_id!r}; choose from {', '.join(ZOO_IDS)}") from None


def sample_zoo(density_id, n, seed):
    """``n`` i.i.d. draws from a zoo density; ``seed`` is anything
    :func:`numpy.random.default_rng` accepts."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return get_density(density_id).sample(int(n), rng)
