"""Unitary correspondence between Bargmann spaces of two deformations.

For a12^2(rho) = sum_k a_k exp(alpha_k rho) with a_k > 0 the transported data are

    F2(x)      = sum_k a_k exp(-alpha_k) F1(x exp(-alpha_k))
    psi2(rho)  = psi1(rho) a12^2(rho) / a12^2(rho - 1)

so that F2^(rho) = a12^2(rho - 1) F1^(rho) and the Mellin recursion carries over.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .algebra import PsiSpec, psi_limits
from .errors import InvalidSpec
from .weight import MellinTransform, WeightFunction


@dataclass(frozen=True)
class ExpSumChoice:
    """Pairs (a_k, alpha_k) with a_k > 0 and alpha_k strictly increasing."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple((float(a), float(alpha)) for a, alpha in self.pairs)
        if not pairs:
            raise InvalidSpec("exponential sum needs at least one term")
        if any(not a > 0 for a, _ in pairs):
            raise InvalidSpec("all coefficients a_k must be strictly positive")
        alphas = [alpha for _, alpha in pairs]
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise InvalidSpec("exponents alpha_k must be strictly increasing")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_json(cls, text: str) -> "ExpSumChoice":
        return cls(tuple(tuple(p) for p in json.loads(text)))

    @property
    def alphas(self):
        return tuple(alpha for _, alpha in self.pairs)

    def log_value(self, rho):
        rho = np.asarray(rho)
        terms = [math.log(a) + alpha * rho for a, alpha in self.pairs]
        if np.iscomplexobj(rho):
            return np.log(sum(np.exp(t) for t in terms))
        return np.logaddexp.reduce(np.array(terms), axis=0)

    def compose(self, other: "ExpSumChoice") -> "ExpSumChoice":
        """Product of the two exponential sums (transport by self, then by other)."""
        merged = {}
        for a, alpha in self.pairs:
            for b, beta in other.pairs:
                key = alpha + beta
                merged[key] = merged.get(key, 0.0) + a * b
        return ExpSumChoice(tuple((merged[k], k) for k in sorted(merged)))


def a12_sq(choice: ExpSumChoice, rho):
    value = np.exp(choice.log_value(rho))
    return float(value) if np.ndim(value) == 0 and not np.iscomplexobj(value) else value


def a12_ratio(choice: ExpSumChoice, rho: float) -> float:
    """a12^2(rho) / a12^2(rho - 1) = psi2(rho) / psi1(rho)."""
    return math.exp(float(choice.log_value(rho) - choice.log_value(rho - 1.0)))


@dataclass(frozen=True)
class TransportedPsi(PsiSpec):
    base: PsiSpec
    choice: ExpSumChoice
    family = "transported"

    def log_psi(self, x):
        return (self.base.log_psi(x) + float(self.choice.log_value(x))
                - float(self.choice.log_value(x - 1.0)))

    def limits(self):
        lo, hi = psi_limits(self.base)
        return lo * math.exp(self.choice.alphas[0]), hi * math.exp(self.choice.alphas[-1])

    def describe(self):
        return {"family": self.family, "base": self.base.describe(),
                "choice": [list(p) for p in self.choice.pairs]}


def psi2_induced(psi1: PsiSpec, choice: ExpSumChoice, rho: float) -> float:
    return math.exp(TransportedPsi(psi1, choice).log_psi(rho))


def transport_weight(F1: WeightFunction, choice: ExpSumChoice, normalize: bool = True) -> WeightFunction:
    """Push F1 forward along the exponential-sum choice.

    With F1 normalised to M1(0) = 1, dividing by a12^2(0) gives M2(0) = 1.
    """
    pairs = choice.pairs

    def func(x):
        x = np.asarray(x, dtype=float)
        return sum(a * math.exp(-alpha) * F1(x * math.exp(-alpha)) for a, alpha in pairs)

    mellin = None
    if F1.mellin is not None:
        base = F1.mellin

        def log_eval(rho):
            return choice.log_value(np.asarray(rho) - 1.0) + base.log(rho)

        psi = TransportedPsi(base.psi, choice) if base.psi is not None else None
        mellin = MellinTransform(log_eval, base.provenance, psi, base.strip, base.admissible)

    scale = 1.0 / a12_sq(choice, 0.0) if normalize else 1.0
    alphas = choice.alphas
    return WeightFunction(
        func,
        F1.provenance,
        F1.positivity,
        scale,
        mellin=mellin,
        u_center=F1.u_center + 0.5 * (alphas[0] + alphas[-1]),
        u_scale=max(F1.u_scale, 0.5 * (alphas[-1] - alphas[0])),
        u_slope=F1.u_slope,
        meta={**F1.meta, "transport": [list(p) for p in pairs]},
    )
