"""Benchmark black-box objectives with known optima.

All objectives are maximized.  The continuous ones are supplied negated
(sphere_max, rosenbrock_max, rastrigin_max), so their values are <= 0 and
they must be paired with rank/quantile/exponential shaping; identity
shaping rejects negative values.

Objectives are addressable by config strings: ``onemax:32``,
``leadingones:16``, ``trap:5x6`` (block size x block count), ``sphere:10``,
``rosenbrock:4``, ``rastrigin:10``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class Domain:
    kind: str  # "binary" | "categorical" | "continuous"
    dim: int
    arity: int | None = None

    def check(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z)
        if Z.ndim == 1:
            Z = Z.reshape(1, -1)
        if Z.ndim != 2 or Z.shape[1] != self.dim:
            raise DomainError(f"expected points of dimension {self.dim}")
        if self.kind == "binary":
            if not np.all((Z == 0) | (Z == 1)):
                raise DomainError("binary objective expects entries in {0,1}")
        elif self.kind == "categorical":
            if not np.all((Z >= 0) & (Z < self.arity) & (Z == Z.astype(np.int64))):
                raise DomainError(f"categorical objective expects entries in 0..{self.arity - 1}")
        else:
            if not np.all(np.isfinite(np.asarray(Z, dtype=np.float64))):
                raise DomainError("continuous objective expects finite entries")
        return Z


@dataclass(frozen=True)
class Objective:
    """A deterministic total map from the domain to the reals.

    ``batch_eval`` takes an (n, dim) array and returns (n,) values;
    ``known_opt`` is (argmax point or None, max value) where declared.
    """

    name: str
    domain: Domain
    batch_eval: Callable[[np.ndarray], np.ndarray]
    known_opt: Optional[tuple] = None

    def __call__(self, z) -> float:
        return evaluate(self, z)


def evaluate(obj: Objective, z) -> float:
    Z = obj.domain.check(np.asarray(z))
    return float(obj.batch_eval(Z)[0])


def evaluate_batch(obj: Objective, Z) -> np.ndarray:
    Z = obj.domain.check(Z)
    return np.asarray(obj.batch_eval(Z), dtype=np.float64).reshape(Z.shape[0])


def onemax(dim: int) -> Objective:
    return Objective(
        name=f"onemax:{dim}",
        domain=Domain("binary", dim),
        batch_eval=lambda Z: np.asarray(Z, dtype=np.float64).sum(axis=1),
        known_opt=(np.ones(dim, dtype=np.int64), float(dim)),
    )


def leadingones(dim: int) -> Objective:
    def _eval(Z):
        Z = np.asarray(Z, dtype=np.float64)
        # prefix product is 1 until the first zero bit
        return np.cumprod(Z, axis=1).sum(axis=1)

    return Objective(
        name=f"leadingones:{dim}",
        domain=Domain("binary", dim),
        batch_eval=_eval,
        known_opt=(np.ones(dim, dtype=np.int64), float(dim)),
    )


def trap(block_size: int, n_blocks: int) -> Objective:
    """Concatenated deceptive traps: a block of k bits scores k when all
    ones, otherwise k - 1 - (number of ones), which points away from the
    optimum."""
    k, b = block_size, n_blocks
    dim = k * b

    def _eval(Z):
        Z = np.asarray(Z, dtype=np.int64)
        units = Z.reshape(Z.shape[0], b, k).sum(axis=2)
        return np.where(units == k, float(k), k - 1.0 - units).sum(axis=1)

    return Objective(
        name=f"trap:{k}x{b}",
        domain=Domain("binary", dim),
        batch_eval=_eval,
        known_opt=(np.ones(dim, dtype=np.int64), float(k * b)),
    )


def sphere_max(dim: int) -> Objective:
    return Objective(
        name=f"sphere_max:{dim}",
        domain=Domain("continuous", dim),
        batch_eval=lambda Z: -np.sum(np.asarray(Z, dtype=np.float64) ** 2, axis=1),
        known_opt=(np.zeros(dim), 0.0),
    )


def rosenbrock_max(dim: int) -> Objective:
    if dim < 2:
        raise ConfigError("rosenbrock needs dim >= 2")

    def _eval(Z):
        Z = np.asarray(Z, dtype=np.float64)
        a, b = Z[:, :-1], Z[:, 1:]
        return -np.sum(100.0 * (b - a**2) ** 2 + (1.0 - a) ** 2, axis=1)

    return Objective(
        name=f"rosenbrock_max:{dim}",
        domain=Domain("continuous", dim),
        batch_eval=_eval,
        known_opt=(np.ones(dim), 0.0),
    )


def rastrigin_max(dim: int) -> Objective:
    def _eval(Z):
        Z = np.asarray(Z, dtype=np.float64)
        return -(10.0 * Z.shape[1] + np.sum(Z**2 - 10.0 * np.cos(2.0 * np.pi * Z), axis=1))

    return Objective(
        name=f"rastrigin_max:{dim}",
        domain=Domain("continuous", dim),
        batch_eval=_eval,
        known_opt=(np.zeros(dim), 0.0),
    )


NEGATED_CONTINUOUS = ("sphere_max", "rosenbrock_max", "rastrigin_max")


def parse_objective(text: str) -> Objective:
    """Build an objective from a name:params config string."""
    name, _, arg = text.strip().partition(":")
    name = name.strip().lower()
    try:
        if name == "onemax":
            return onemax(int(arg))
        if name == "leadingones":
            return leadingones(int(arg))
        if name == "trap":
            k, b = (int(x) for x in arg.lower().split("x"))
            return trap(k, b)
        if name in ("sphere", "sphere_max"):
            return sphere_max(int(arg))
        if name in ("rosenbrock", "rosenbrock_max"):
            return rosenbrock_max(int(arg))
        if name in ("rastrigin", "rastrigin_max"):
            return rastrigin_max(int(arg))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad objective parameters in {text!r}: {exc}") from exc
    raise ConfigError(
        f"unknown objective {text!r}; known: onemax:D, leadingones:D, trap:KxB, "
        "sphere:D, rosenbrock:D, rastrigin:D"
    )
