"""Classical message-passing models and their witness bounds.

A deterministic strategy encodes each preparation index into a message
m in {0..d-1} and decodes (message, measurement index) into one of the
two outcomes.  Two kinds of randomness sit on top:

- *Shared* randomness: an arbitrary convex mixture of deterministic
  strategies (`MixedStrategy`), where one random variable selects the
  encoder and decoder jointly.  Linear witnesses such as the dimension
  witness are maximized at deterministic strategies by convexity, so
  their bounds hold against shared randomness too.

- *Independent* randomness: the encoder and decoder are randomized
  separately, with no correlation between them.  This is the
  communication structure of a prepare-and-measure experiment whose
  boxes share no prior common cause.  The determinant witness is only
  a null test against this class: with d = 2 every product of a
  stochastic encoder and a stochastic decoder has det W = 0, whereas
  *correlated* mixtures reach |det W| = 1/4 (see tests for an explicit
  two-strategy example).  `classical_max_det` therefore searches the
  independent (product) space, and `classical_max_linear` the full
  mixture space.

Enumeration is exhaustive below a configurable cap and refuses loudly
above it.  Outcome encoding: decode entries are 1 for outcome "e" and
0 for outcome "d".
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .scenario import ProbabilityTable

DEFAULT_ENUMERATION_CAP = 10_000_000

TableFunctional = Callable[[ProbabilityTable], float]


class EnumerationCapExceeded(RuntimeError):
    """Strategy space too large for exhaustive enumeration."""


@dataclass(frozen=True)
class DeterministicStrategy:
    """encode: preparation -> message; decode[message][measurement] -> outcome.

    Decode entries are 1 for outcome "e", 0 for outcome "d".
    """

    encode: tuple[int, ...]
    decode: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        d = len(self.decode)
        if d == 0:
            raise ValueError("decode table must have at least one message row")
        if any(not 0 <= m < d for m in self.encode):
            raise ValueError("encode maps to a message outside the decode table")
        if any(bit not in (0, 1) for row in self.decode for bit in row):
            raise ValueError("decode entries must be 0 (outcome d) or 1 (outcome e)")

    @property
    def dimension(self) -> int:
        return len(self.decode)

    def to_json_dict(self) -> dict:
        return {
            "encode": list(self.encode),
            "decode": [["e" if bit else "d" for bit in row] for row in self.decode],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "DeterministicStrategy":
        return cls(
            encode=tuple(int(m) for m in d["encode"]),
            decode=tuple(
                tuple(1 if out == "e" else 0 for out in row) for row in d["decode"]
            ),
        )


@dataclass(frozen=True)
class MixedStrategy:
    """Convex mixture of deterministic strategies (shared randomness)."""

    components: tuple[tuple[float, DeterministicStrategy], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        weights = [w for w, _ in self.components]
        if min(weights) < 0.0:
            raise ValueError("mixture weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {sum(weights)}, expected 1")
        dims = {s.dimension for _, s in self.components}
        if len(dims) != 1:
            raise ValueError("all mixture components must share one message dimension")

    @property
    def dimension(self) -> int:
        return self.components[0][1].dimension

    def to_json_dict(self) -> dict:
        return {
            "components": [
                {"weight": w, "strategy": s.to_json_dict()} for w, s in self.components
            ]
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MixedStrategy":
        return cls(
            components=tuple(
                (float(c["weight"]), DeterministicStrategy.from_json_dict(c["strategy"]))
                for c in d["components"]
            )
        )


@dataclass(frozen=True)
class RetrocausalStrategy:
    """Causal base model plus a probability `leak` of seeing the
    measurement index before encoding."""

    base: MixedStrategy
    leak: float

    def __post_init__(self):
        if not 0.0 <= self.leak <= 1.0:
            raise ValueError(f"leak probability must be in [0, 1], got {self.leak}")


def strategy_table(
    strategy: DeterministicStrategy | MixedStrategy, n_prep: int, n_meas: int
) -> ProbabilityTable:
    """Evaluate a strategy into outcome probabilities (p_none = 0)."""
    if isinstance(strategy, MixedStrategy):
        p_e = np.zeros((n_prep, n_meas))
        for w, s in strategy.components:
            p_e += w * _deterministic_pe(s, n_prep, n_meas)
    else:
        p_e = _deterministic_pe(strategy, n_prep, n_meas)
    return ProbabilityTable(p_e, 1.0 - p_e, np.zeros((n_prep, n_meas)))


def _deterministic_pe(s: DeterministicStrategy, n_prep: int, n_meas: int) -> np.ndarray:
    if len(s.encode) < n_prep:
        raise IndexError(f"strategy encodes {len(s.encode)} preparations, need {n_prep}")
    if any(len(row) < n_meas for row in s.decode):
        raise IndexError(f"strategy decodes fewer than {n_meas} measurements")
    return np.array(
        [[float(s.decode[s.encode[i]][j]) for j in range(n_meas)] for i in range(n_prep)]
    )


def strategy_count(d: int, n_prep: int, n_meas: int) -> int:
    return d**n_prep * 2 ** (d * n_meas)


def _check_cap(count: int, cap: int) -> None:
    if count > cap:
        raise EnumerationCapExceeded(
            f"{count} strategies exceed the enumeration cap of {cap}"
        )


def enumerate_deterministic(
    d: int, n_prep: int, n_meas: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[DeterministicStrategy]:
    """Yield every deterministic strategy exactly once.

    Refuses immediately (before yielding anything) if the strategy
    count exceeds `cap`.
    """
    if d < 1:
        raise ValueError(f"message dimension must be >= 1, got {d}")
    _check_cap(strategy_count(d, n_prep, n_meas), cap)

    def _generate() -> Iterator[DeterministicStrategy]:
        decode_rows = list(itertools.product((0, 1), repeat=n_meas))
        for encode in itertools.product(range(d), repeat=n_prep):
            for decode in itertools.product(decode_rows, repeat=d):
                yield DeterministicStrategy(encode=encode, decode=decode)

    return _generate()


def classical_max_linear(
    witness: TableFunctional,
    d: int,
    n_prep: int,
    n_meas: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> tuple[float, DeterministicStrategy]:
    """Exact maximum of a linear table functional over all mixtures.

    By convexity the maximum is attained at a deterministic strategy,
    so exhaustive enumeration is an exact certificate.
    """
    best_value = -np.inf
    best = None
    for s in enumerate_deterministic(d, n_prep, n_meas, cap=cap):
        value = witness(strategy_table(s, n_prep, n_meas))
        if value > best_value:
            best_value, best = value, s
    assert best is not None
    return best_value, best


# ---------------------------------------------------------------------------
# Determinant witness over the independent (product) randomness space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetBoundResult:
    """Outcome of the determinant-witness search.

    `value` is the overall maximum found; `deterministic_max` is exact
    (exhaustive), `mixture_max` is the best value reached by the seeded
    hill climbs over independent encoder/decoder randomization.
    """

    value: float
    strategy: DeterministicStrategy
    deterministic_max: float
    mixture_max: float
    n_strategies: int
    restarts: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "strategy": self.strategy.to_json_dict(),
            "deterministic_max": self.deterministic_max,
            "mixture_max": self.mixture_max,
            "n_strategies": self.n_strategies,
            "restarts": self.restarts,
            "seed": self.seed,
        }


def _abs_det2(w: np.ndarray) -> float:
    return abs(w[0, 0] * w[1, 1] - w[0, 1] * w[1, 0])


def _best_coordinate_move(
    w: np.ndarray, candidates: np.ndarray
) -> tuple[float, int, float]:
    """Exact line search toward each candidate vertex matrix.

    Along w(t) = (1-t) w + t b the determinant is quadratic in t, so
    |det| on [0, 1] peaks at an endpoint or the interior extremum.
    Returns (best |det|, candidate index, t).
    """
    delta = candidates - w
    det_w = w[0, 0] * w[1, 1] - w[0, 1] * w[1, 0]
    det_delta = delta[:, 0, 0] * delta[:, 1, 1] - delta[:, 0, 1] * delta[:, 1, 0]
    cross = (
        w[0, 0] * delta[:, 1, 1]
        + delta[:, 0, 0] * w[1, 1]
        - w[0, 1] * delta[:, 1, 0]
        - delta[:, 0, 1] * w[1, 0]
    )
    at_one = np.abs(det_w + cross + det_delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_star = np.where(det_delta != 0.0, -cross / (2.0 * det_delta), np.nan)
    valid = np.isfinite(t_star) & (t_star > 0.0) & (t_star < 1.0)
    t_star = np.where(valid, t_star, 0.0)
    at_star = np.where(
        valid, np.abs(det_w + cross * t_star + det_delta * t_star**2), -np.inf
    )
    best_at_one = int(np.argmax(at_one))
    best_at_star = int(np.argmax(at_star))
    if at_star[best_at_star] > at_one[best_at_one]:
        return float(at_star[best_at_star]), best_at_star, float(t_star[best_at_star])
    return float(at_one[best_at_one]), best_at_one, 1.0


def classical_max_det(
    d: int,
    n_prep: int = 4,
    n_meas: int = 2,
    restarts: int = 10_000,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> DetBoundResult:
    """Maximize |det W| over d-dimensional strategies with independent
    encoder/decoder randomness.

    All deterministic strategies are checked exhaustively; on top of
    that, seeded random-restart coordinate ascent runs over the product
    of the encoder-mixture and decoder-mixture simplices, with an exact
    quadratic line search per coordinate move.  The maximum of the
    bilinear objective is attained at a vertex pair, so the climbs are
    a numerical confirmation rather than an extension of the bound.
    """
    if d < 2:
        raise ValueError(f"determinant search needs message dimension >= 2, got {d}")
    if n_prep < 4 or n_meas < 2:
        raise ValueError("determinant witness needs >= 4 preparations and >= 2 measurements")
    _check_cap(strategy_count(d, n_prep, n_meas), cap)

    contrast = np.zeros((2, n_prep))
    contrast[0, 0], contrast[0, 1] = 1.0, -1.0
    contrast[1, 2], contrast[1, 3] = 1.0, -1.0

    encoders = list(itertools.product(range(d), repeat=n_prep))
    decoders = list(itertools.product(itertools.product((0, 1), repeat=n_meas), repeat=d))

    # contrast @ one-hot(encoder): shape (n_enc, 2, d)
    ce = np.zeros((len(encoders), 2, d))
    for a, enc in enumerate(encoders):
        onehot = np.zeros((n_prep, d))
        onehot[np.arange(n_prep), enc] = 1.0
        ce[a] = contrast @ onehot
    # p_d rows of each decoder, first two measurement columns: (n_dec, d, 2)
    dd = np.array([[[1.0 - row[j] for j in range(2)] for row in dec] for dec in decoders])

    det_max = -1.0
    best_pair = (0, 0)
    for a in range(len(encoders)):
        w_all = ce[a] @ dd  # (n_dec, 2, 2)
        dets = np.abs(w_all[:, 0, 0] * w_all[:, 1, 1] - w_all[:, 0, 1] * w_all[:, 1, 0])
        b = int(np.argmax(dets))
        if dets[b] > det_max:
            det_max, best_pair = float(dets[b]), (a, b)

    mixture_max = 0.0
    root = np.random.SeedSequence(seed)
    for child in root.spawn(restarts):
        rng = np.random.default_rng(child)
        u = rng.dirichlet(np.ones(len(encoders)))
        v = rng.dirichlet(np.ones(len(decoders)))
        x = np.tensordot(u, ce, axes=1)  # (2, d)
        y = np.tensordot(v, dd, axes=1)  # (d, 2)
        w = x @ y
        current = _abs_det2(w)
        for _ in range(200):
            improved = False
            enc_val, a, t = _best_coordinate_move(w, ce @ y)
            if enc_val > current + 1e-15:
                x = (1.0 - t) * x + t * ce[a]
                w = x @ y
                current = _abs_det2(w)
                improved = True
            dec_val, b, t = _best_coordinate_move(w, x @ dd)
            if dec_val > current + 1e-15:
                y = (1.0 - t) * y + t * dd[b]
                w = x @ y
                current = _abs_det2(w)
                improved = True
            if not improved:
                break
        mixture_max = max(mixture_max, current)

    a, b = best_pair
    strategy = DeterministicStrategy(encode=encoders[a], decode=decoders[b])
    return DetBoundResult(
        value=max(det_max, mixture_max),
        strategy=strategy,
        deterministic_max=det_max,
        mixture_max=mixture_max,
        n_strategies=strategy_count(d, n_prep, n_meas),
        restarts=restarts,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Retrocausal models
# ---------------------------------------------------------------------------


def setting_aware_max(
    witness: TableFunctional,
    d: int,
    n_prep: int,
    n_meas: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Exact witness maximum when the encoder also sees the measurement
    index, enumerated over encode: (i, j) -> m and decode: (m, j) -> outcome."""
    if d < 1:
        raise ValueError(f"message dimension must be >= 1, got {d}")
    count = d ** (n_prep * n_meas) * 2 ** (d * n_meas)
    _check_cap(count, cap)
    decode_rows = list(itertools.product((0, 1), repeat=n_meas))
    best = -np.inf
    for encode in itertools.product(range(d), repeat=n_prep * n_meas):
        for decode in itertools.product(decode_rows, repeat=d):
            p_e = np.array(
                [
                    [float(decode[encode[i * n_meas + j]][j]) for j in range(n_meas)]
                    for i in range(n_prep)
                ]
            )
            table = ProbabilityTable(p_e, 1.0 - p_e, np.zeros((n_prep, n_meas)))
            value = witness(table)
            if value > best:
                best = value
    return float(best)


def retrocausal_value(
    witness: TableFunctional,
    strat: RetrocausalStrategy,
    n_prep: int,
    n_meas: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Witness value of a retrocausal strategy: with probability `leak`
    the encoder sees the setting and plays the best setting-aware
    strategy, otherwise the causal base model runs."""
    base_value = witness(strategy_table(strat.base, n_prep, n_meas))
    if strat.leak == 0.0:
        return base_value
    leaked = setting_aware_max(witness, strat.base.dimension, n_prep, n_meas, cap=cap)
    return (1.0 - strat.leak) * base_value + strat.leak * leaked


def retrocausal_max(
    witness: TableFunctional,
    d: int,
    n_prep: int,
    n_meas: int,
    leak: float,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Maximum witness value at a given leak probability (optimal base)."""
    causal, _ = classical_max_linear(witness, d, n_prep, n_meas, cap=cap)
    if leak == 0.0:
        return causal
    leaked = setting_aware_max(witness, d, n_prep, n_meas, cap=cap)
    return (1.0 - leak) * causal + leak * leaked


def strategy_to_json(strategy: DeterministicStrategy | MixedStrategy) -> str:
    return json.dumps(strategy.to_json_dict(), indent=2, sort_keys=True) + "\n"
