import math

import numpy as np
import pytest

from pamsim.classical import (
    DeterministicStrategy,
    EnumerationCapExceeded,
    MixedStrategy,
    RetrocausalStrategy,
    classical_max_det,
    classical_max_linear,
    enumerate_deterministic,
    retrocausal_max,
    retrocausal_value,
    setting_aware_max,
    strategy_count,
    strategy_table,
)
from pamsim.witness import det_witness, dimension_witness

ALWAYS_E = DeterministicStrategy(encode=(0, 0, 0, 0), decode=((1, 1),))
ALWAYS_D = DeterministicStrategy(encode=(0, 0, 0, 0), decode=((0, 0),))


class TestStrategyTable:
    def test_always_e(self):
        table = strategy_table(ALWAYS_E, 4, 2)
        assert table.p_e.min() == 1.0
        assert table.p_d.max() == 0.0
        assert table.p_none.max() == 0.0

    def test_uniform_mixture(self):
        mix = MixedStrategy(components=((0.5, ALWAYS_E), (0.5, ALWAYS_D)))
        table = strategy_table(mix, 4, 2)
        np.testing.assert_allclose(table.p_e, 0.5)
        np.testing.assert_allclose(table.p_d, 0.5)

    def test_index_out_of_range(self):
        short = DeterministicStrategy(encode=(0, 0), decode=((1, 1),))
        with pytest.raises(IndexError):
            strategy_table(short, 4, 2)

    def test_bad_strategy_rejected(self):
        with pytest.raises(ValueError):
            DeterministicStrategy(encode=(0, 2), decode=((1, 1), (0, 0)))
        with pytest.raises(ValueError):
            DeterministicStrategy(encode=(0,), decode=((1, 3),))

    def test_mixture_weight_validation(self):
        with pytest.raises(ValueError):
            MixedStrategy(components=((0.6, ALWAYS_E), (0.6, ALWAYS_D)))
        with pytest.raises(ValueError):
            MixedStrategy(components=((-0.5, ALWAYS_E), (1.5, ALWAYS_D)))

    def test_json_round_trip(self):
        s = DeterministicStrategy(encode=(0, 1, 1, 0), decode=((1, 0), (0, 1)))
        assert DeterministicStrategy.from_json_dict(s.to_json_dict()) == s


class TestEnumeration:
    def test_counts(self):
        assert sum(1 for _ in enumerate_deterministic(2, 3, 2)) == 128
        assert sum(1 for _ in enumerate_deterministic(2, 4, 2)) == 256
        assert strategy_count(2, 3, 2) == 128

    def test_unique(self):
        seen = set(enumerate_deterministic(2, 3, 2))
        assert len(seen) == 128

    def test_cap_refusal_is_immediate(self):
        with pytest.raises(EnumerationCapExceeded, match=str(strategy_count(8, 3, 2))):
            enumerate_deterministic(8, 3, 2, cap=10_000)


class TestLinearBounds:
    def test_d2_dimension_witness_bound(self):
        value, strategy = classical_max_linear(dimension_witness, 2, 3, 2)
        assert value == 3.0
        assert dimension_witness(strategy_table(strategy, 3, 2)) == 3.0

    def test_d1_dimension_witness_bound(self):
        value, _ = classical_max_linear(dimension_witness, 1, 3, 2)
        assert value == 1.0

    def test_d3_saturates(self):
        value, _ = classical_max_linear(dimension_witness, 3, 3, 2)
        assert value == 5.0

    def test_monotone_in_dimension(self):
        values = [classical_max_linear(dimension_witness, d, 3, 2)[0] for d in (1, 2, 3, 4)]
        assert values == [1.0, 3.0, 5.0, 5.0]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_constant_zero_witness(self):
        value, _ = classical_max_linear(lambda t: 0.0, 2, 3, 2)
        assert value == 0.0

    def test_convexity(self):
        rng = np.random.default_rng(31)
        strategies = list(enumerate_deterministic(2, 3, 2))
        for _ in range(20):
            picks = rng.choice(len(strategies), size=4, replace=False)
            weights = rng.dirichlet(np.ones(4))
            mix = MixedStrategy(
                components=tuple((weights[k], strategies[p]) for k, p in enumerate(picks))
            )
            mixed_value = dimension_witness(strategy_table(mix, 3, 2))
            expected = sum(
                w * dimension_witness(strategy_table(s, 3, 2)) for w, s in mix.components
            )
            assert mixed_value == pytest.approx(expected, abs=1e-12)


class TestDeterminantBound:
    def test_every_d2_deterministic_strategy_is_singular(self):
        dets = [
            det_witness(strategy_table(s, 4, 2))
            for s in enumerate_deterministic(2, 4, 2)
        ]
        assert len(dets) == 256
        assert max(dets) == 0.0

    def test_search_d2(self):
        result = classical_max_det(2, restarts=500, seed=5)
        assert result.deterministic_max == 0.0
        assert result.mixture_max <= 1e-9
        assert result.n_strategies == 256

    def test_search_d4_reaches_two(self):
        # injective encoding frees all eight table entries; the extremal
        # matrix [[1,-1],[1,1]] has |det| = 2
        result = classical_max_det(4, restarts=50, seed=5)
        assert result.deterministic_max == 2.0
        assert result.value == 2.0

    def test_d4_can_reproduce_ideal_witness(self):
        s = DeterministicStrategy(
            encode=(0, 1, 2, 3),
            decode=((1, 1), (1, 0), (0, 1), (1, 1)),
        )
        table = strategy_table(s, 4, 2)
        assert det_witness(table) == 1.0

    def test_correlated_mixture_breaks_the_null(self):
        """Shared randomness between encoder and decoder reaches |det| = 1/4,
        which is why the search runs over independent randomization only."""
        a = DeterministicStrategy(encode=(0, 1, 0, 0), decode=((0, 1), (1, 1)))
        b = DeterministicStrategy(encode=(0, 0, 0, 1), decode=((1, 1), (1, 0)))
        assert det_witness(strategy_table(a, 4, 2)) == 0.0
        assert det_witness(strategy_table(b, 4, 2)) == 0.0
        mix = MixedStrategy(components=((0.5, a), (0.5, b)))
        assert det_witness(strategy_table(mix, 4, 2)) == pytest.approx(0.25, abs=1e-12)

    def test_seeded_search_is_deterministic(self):
        r1 = classical_max_det(2, restarts=100, seed=9)
        r2 = classical_max_det(2, restarts=100, seed=9)
        assert r1.mixture_max == r2.mixture_max

    def test_rejects_d1(self):
        with pytest.raises(ValueError):
            classical_max_det(1)


class TestRetrocausal:
    def test_no_leak_equals_base(self):
        base = MixedStrategy(components=((1.0, ALWAYS_E),))
        strat = RetrocausalStrategy(base=base, leak=0.0)
        expected = dimension_witness(strategy_table(base, 3, 2))
        assert retrocausal_value(dimension_witness, strat, 3, 2) == expected

    def test_full_leak_reaches_five(self):
        assert setting_aware_max(dimension_witness, 2, 3, 2) == 5.0
        assert retrocausal_max(dimension_witness, 2, 3, 2, leak=1.0) == 5.0

    def test_half_leak_interpolates(self):
        assert retrocausal_max(dimension_witness, 2, 3, 2, leak=0.5) == pytest.approx(
            4.0, abs=1e-12
        )

    def test_retrocausality_never_exceeds_leak(self):
        rng = np.random.default_rng(33)
        strategies = list(enumerate_deterministic(2, 3, 2))
        for leak in (0.0, 0.1, 0.25, 0.5, 0.8, 1.0):
            for _ in range(5):
                picks = rng.choice(len(strategies), size=3, replace=False)
                weights = rng.dirichlet(np.ones(3))
                base = MixedStrategy(
                    components=tuple((weights[k], strategies[p]) for k, p in enumerate(picks))
                )
                value = retrocausal_value(
                    dimension_witness, RetrocausalStrategy(base=base, leak=leak), 3, 2
                )
                r = max((value - 3.0) / 4.0, 0.0)
                assert r <= leak + 1e-12

    def test_leak_domain(self):
        base = MixedStrategy(components=((1.0, ALWAYS_E),))
        with pytest.raises(ValueError):
            RetrocausalStrategy(base=base, leak=1.5)
