"""Parameter families indexed by n, and the completion-time rate families."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from dynamic_graph.state import EdgeProcessSpec
from edge_dynamics.errors import GossipDynError
from edge_dynamics.params import IidEdgeParams, MarkovEdgeParams
from edge_dynamics.renewal import constant_hazard, example_hazard
from protocols.rounds import Protocol

from .config import ConfigError


@dataclass(frozen=True)
class PowerLaw:
    """coef / n^exponent."""

    coef: float
    exponent: float = 0.0

    def __call__(self, n: int) -> float:
        return self.coef / n ** self.exponent

    @property
    def limit(self) -> float:
        if self.exponent > 0:
            return 0.0
        if self.exponent == 0:
            return self.coef
        return math.inf

    @classmethod
    def parse(cls, text: str) -> "PowerLaw":
        """'c' or 'c/n^e', e.g. '1/n^2'."""
        text = text.replace(" ", "")
        if "/n^" in text:
            coef, exponent = text.split("/n^", 1)
            return cls(float(coef), float(exponent))
        if text.endswith("/n"):
            return cls(float(text[:-2]), 1.0)
        return cls(float(text))


class FamilyKind(str, Enum):
    PQ = "pq"
    FASTMIX = "fastmix"
    SPARSE = "sparse"
    PERSISTENT = "persistent"
    RENEWAL = "renewal"
    IID = "iid"
    COMPLETE = "complete"


@dataclass(frozen=True)
class ParamFamily:
    """
    Edge dynamics as a function of n.

    pq:         Markov(p, q) with constant p, q
    fastmix:    Markov(f(n), 1 - g(n)) with |g - f| <= M / n^alpha_family
    sparse:     Markov(a / n^k, 1)
    persistent: Markov(a / n^k, 1 - alpha); its lower companion is Markov(a / n^k, 1)
    renewal:    hazard with alpha_n = g(n) / n^lam ("constant"), the
                increasing hazard 1 - (i + 2) / ((i + 1) n^lam) ("example"), or a fixed
                constant hazard given as a number
    iid:        independent ER(p(n)) graphs
    complete:   the static complete graph (Markov(1, 0))
    """

    kind: FamilyKind
    p: float = 0.5
    q: float = 0.5
    f: PowerLaw = PowerLaw(1.0, 2.0)
    g: PowerLaw = PowerLaw(0.0)
    M: float = 1.0
    alpha_family: float = 2.0
    a: float = 1.0
    k: float = 1.5
    alpha: float = 0.3
    lam: float = 1.0
    hazard: str = "constant"
    iid_p: PowerLaw = PowerLaw(0.5)

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", FamilyKind(self.kind))
        except ValueError:
            raise ConfigError(f"unknown family {self.kind!r}")

    @property
    def dynamics(self) -> str:
        if self.kind == FamilyKind.IID:
            return "iid"
        if self.kind == FamilyKind.RENEWAL:
            return "renewal"
        return "markov"

    @property
    def gamma_limit(self) -> float:
        return self.g.limit

    def edge_params(self, n: int):
        try:
            match self.kind:
                case FamilyKind.PQ:
                    return MarkovEdgeParams(self.p, self.q)
                case FamilyKind.FASTMIX:
                    return MarkovEdgeParams(self.f(n), 1.0 - self.g(n))
                case FamilyKind.SPARSE:
                    return MarkovEdgeParams(self.a / n ** self.k, 1.0)
                case FamilyKind.PERSISTENT:
                    return MarkovEdgeParams(self.a / n ** self.k, 1.0 - self.alpha)
                case FamilyKind.RENEWAL:
                    if self.hazard == "example":
                        return example_hazard(n ** self.lam)
                    if self.hazard == "constant":
                        return constant_hazard(1.0 - self.g(n) / n ** self.lam)
                    return constant_hazard(float(self.hazard))
                case FamilyKind.IID:
                    return IidEdgeParams(min(1.0, max(0.0, self.iid_p(n))))
                case FamilyKind.COMPLETE:
                    return MarkovEdgeParams(1.0, 0.0)
        except GossipDynError as e:
            raise ConfigError(f"{self.kind.value} family at n={n}: {e}") from e
        raise ConfigError(f"unknown family {self.kind!r}")

    def spec(self, n: int) -> EdgeProcessSpec:
        return EdgeProcessSpec(n, self.edge_params(n))

    def lower_spec(self, n: int) -> EdgeProcessSpec:
        """Lower graph of the persistent family: Markov(a / n^k, 1)."""
        if self.kind != FamilyKind.PERSISTENT:
            raise ConfigError("only the persistent family has a coupled lower graph")
        return EdgeProcessSpec(n, MarkovEdgeParams(self.a / n ** self.k, 1.0))

    def ubs_constants(self) -> tuple[float, float] | None:
        """(M, alpha_family) with |Delta| <= M / n^alpha_family, when the family has them."""
        match self.kind:
            case FamilyKind.FASTMIX:
                return self.M, self.alpha_family
            case FamilyKind.SPARSE:
                return self.a, self.k
        return None

    def check_hypothesis(self, n: int):
        """Fast-mixing hypothesis |g(n) - f(n)| <= M / n^alpha_family."""
        if self.kind != FamilyKind.FASTMIX:
            return
        gap = abs(self.g(n) - self.f(n))
        if gap > self.M / n ** self.alpha_family + 1e-15:
            raise ConfigError(
                f"|g(n) - f(n)| = {gap:.6g} exceeds M/n^alpha = {self.M / n ** self.alpha_family:.6g} at n={n}"
            )

    def validate(self, n_grid: list[int]):
        if self.kind == FamilyKind.FASTMIX and (self.M <= 0 or self.alpha_family <= 0):
            raise ConfigError("fastmix family needs M > 0 and alpha_family > 0")
        if self.kind in (FamilyKind.SPARSE, FamilyKind.PERSISTENT) and (self.a <= 0 or self.k <= 0):
            raise ConfigError(f"{self.kind.value} family needs a > 0 and k > 0")
        if self.kind == FamilyKind.PERSISTENT and not 0 < self.alpha <= 1:
            raise ConfigError("persistent family needs 0 < alpha <= 1")
        if self.kind == FamilyKind.RENEWAL:
            if self.lam <= 0:
                raise ConfigError("renewal family needs lam > 0")
            if self.hazard not in ("constant", "example"):
                try:
                    float(self.hazard)
                except ValueError:
                    raise ConfigError(f"hazard must be constant, example or a number, got {self.hazard!r}")
        for n in n_grid:
            self.spec(n)
            self.check_hypothesis(n)
            if self.kind == FamilyKind.PERSISTENT and self.a / n ** self.k > self.alpha:
                raise ConfigError(f"persistent coupling needs a/n^k <= alpha (n={n})")


# -----------------------------
# Rates
# -----------------------------
class RateFamily(str, Enum):
    LOG = "log"
    FLOOD_RATE = "flood"
    PUSH_RATE = "push"
    SPARSE_PUSH = "sparse-push"
    PERSISTENT_FLOOD = "persistent-flood"


def rate_value(rate: RateFamily, n: int, pi1: float, k: float = 1.0) -> float:
    log_n = math.log(n)
    match RateFamily(rate):
        case RateFamily.LOG:
            return log_n
        case RateFamily.FLOOD_RATE:
            growth = math.log1p(n * pi1)
            return log_n / growth if growth > 0 else math.inf
        case RateFamily.PUSH_RATE:
            scale = min(1.0, n * pi1)
            return log_n / scale if scale > 0 else math.inf
        case RateFamily.SPARSE_PUSH:
            return n ** (k - 1.0) * log_n
        case RateFamily.PERSISTENT_FLOOD:
            return log_n / math.log1p(n ** (1.0 - k))
    raise ConfigError(f"unknown rate family {rate!r}")


def default_rate(protocol: Protocol, family: ParamFamily) -> RateFamily:
    protocol = Protocol(protocol)
    if protocol == Protocol.FLOOD:
        return RateFamily.PERSISTENT_FLOOD if family.kind == FamilyKind.PERSISTENT else RateFamily.FLOOD_RATE
    if protocol == Protocol.PUSH:
        return RateFamily.SPARSE_PUSH if family.kind == FamilyKind.SPARSE else RateFamily.PUSH_RATE
    return RateFamily.LOG


def validate_rates(rate: RateFamily, family: ParamFamily, n_grid: list[int]):
    """Every r(n) on the grid must be positive and finite before any trial runs."""
    for n in n_grid:
        if n < 2:
            continue
        value = rate_value(rate, n, family.spec(n).pi1, family.k)
        if not (0.0 < value < math.inf):
            raise ConfigError(f"rate {RateFamily(rate).value} is {value} at n={n}")
