import itertools
import math

import numpy as np
import pytest

from conftest import random_chain, random_reversible_chain
from eprec import data_path
from eprec.core import BINARY, DNA, FiniteAlphabet, Involution
from eprec.models import (
    MarkovModel,
    ModelError,
    PmpModel,
    ReducibleChainError,
    all_marginals,
    brute_force_cross_entropy,
    brute_force_entropy,
    communicating_classes,
    cross_entropy_markov,
    detailed_balance_holds,
    entropy_production_markov,
    entropy_rate,
    format_model,
    is_irreducible_aperiodic,
    load_model,
    marginal,
    multi_step_to_markov,
    parse_model,
    project_word,
    psi_star_zero_bound,
    reversed_model,
    sample,
    stationary_distribution,
    stationary_distribution_power,
)

TRI = FiniteAlphabet(("0", "1", "2"))
CHARGAFF = Involution.from_pairs(DNA, [("C", "G"), ("A", "T")])


def pairwise_ep(model):
    """Independent flux oracle: sum over a<b of (J_ab - J_ba) log(J_ab / J_ba)."""
    J = model.pi[:, None] * model.P
    k = J.shape[0]
    total = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            if J[a, b] > 0 or J[b, a] > 0:
                total += (J[a, b] - J[b, a]) * math.log(J[a, b] / J[b, a])
    return total


class TestChains:
    def test_stationary_methods_agree(self):
        rng = np.random.default_rng(1)
        for k in (2, 3, 5, 8):
            m = random_chain(rng, k)
            pi = stationary_distribution(m.P)
            assert np.allclose(pi @ m.P, pi, atol=1e-13)
            assert np.allclose(pi, stationary_distribution_power(m.P), atol=1e-10)

    def test_reducible(self):
        P = [[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]]
        assert communicating_classes(P) == [[0, 1], [2]]
        with pytest.raises(ReducibleChainError, match=r"\{0,1\}; \{2\}"):
            stationary_distribution(P)

    def test_period(self):
        cyc = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
        f = is_irreducible_aperiodic(cyc)
        assert f.irreducible and not f.aperiodic and f.period == 3
        assert is_irreducible_aperiodic([[0.5, 0.5], [1, 0]]).aperiodic

    def test_validation(self):
        with pytest.raises(ModelError):
            MarkovModel(BINARY, [[0.5, 0.6], [0.5, 0.5]])
        with pytest.raises(ModelError):
            MarkovModel(BINARY, [[0.5, 0.5], [0.5, 0.5]], pi=[0.9, 0.1 + 1e-3])
        with pytest.raises(ModelError):
            MarkovModel(TRI, [[0.5, 0.5], [0.5, 0.5]])


class TestMarginals:
    def test_consistency(self, cycle3):
        # summing out the last letter recovers the shorter marginal
        for n in range(1, 6):
            M = all_marginals(cycle3, n)
            assert M.sum() == pytest.approx(1.0, abs=1e-14)
            if n > 1:
                assert np.allclose(M.sum(axis=-1), all_marginals(cycle3, n - 1), atol=1e-15)
                # stationarity: summing out the first letter also does
                assert np.allclose(M.sum(axis=0), all_marginals(cycle3, n - 1), atol=1e-15)

    def test_direct_product(self, cycle3):
        pi, P = cycle3.pi, cycle3.P
        assert marginal(cycle3, [0, 1, 2, 2]) == 0.0
        assert marginal(cycle3, [0, 1, 2, 0]) == pytest.approx(pi[0] * P[0, 1] * P[1, 2] * P[2, 0])
        with pytest.raises(ValueError):
            marginal(cycle3, [])

    def test_pmp_embedding(self):
        rng = np.random.default_rng(2)
        m = random_chain(rng, 3, TRI)
        e = PmpModel.from_markov(m)
        for n in range(1, 5):
            assert np.allclose(all_marginals(e, n), all_marginals(m, n), atol=1e-15)
        assert sample(e, 500, 9) == sample(m, 500, 9)

    def test_genuine_pmp(self):
        # a two-state hidden chain emitting a noisy copy of its state
        H = np.array([[0.9, 0.1], [0.2, 0.8]])
        E = np.array([[0.8, 0.2], [0.3, 0.7]])
        pi = stationary_distribution(H)
        Pa = np.stack([H * E[:, a][None, :] for a in range(2)])
        pmp = PmpModel(BINARY, pi, Pa)
        # forward-algorithm oracle, written out by hand
        for word in itertools.product(range(2), repeat=4):
            alpha = pi.copy()
            for a in word:
                alpha = (alpha @ H) * E[:, a]
            assert marginal(pmp, word) == pytest.approx(alpha.sum(), rel=1e-12)
        assert psi_star_zero_bound(pmp) == pytest.approx(1 / pi.min() ** 2)


class TestSampling:
    def test_deterministic_and_prefix_consistent(self, cycle3):
        a = sample(cycle3, 1000, 42)
        assert a == sample(cycle3, 1000, 42)
        assert sample(cycle3, 300, 42) == a.prefix(300)
        assert a != sample(cycle3, 1000, 43)

    def test_iid_word_frequencies(self):
        # chi-square on non-overlapping 3-words of a fair coin
        m = load_model(data_path("iid_binary.mk"))
        x = sample(m, 3 * 40000, 3).data.reshape(-1, 3)
        codes = x[:, 0] * 4 + x[:, 1] * 2 + x[:, 2]
        counts = np.bincount(codes, minlength=8)
        expected = len(codes) / 8
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < 24.3  # 0.999 quantile, 7 degrees of freedom

    def test_transition_frequencies(self, chargaff4):
        x = sample(chargaff4, 200000, 8).data
        C = np.zeros((4, 4))
        np.add.at(C, (x[:-1], x[1:]), 1)
        assert np.allclose(C / C.sum(axis=1, keepdims=True), chargaff4.P, atol=0.01)

    def test_zero_probability_never_sampled(self, cycle3):
        x = sample(cycle3, 20000, 1).data
        assert not np.any(x[1:] == x[:-1])


class TestEntropyProduction:
    def test_cycle(self, cycle3):
        assert entropy_production_markov(cycle3, Involution.identity(TRI)) == pytest.approx(0.5 * math.log(3), abs=1e-12)

    def test_cycle_with_swap(self, cycle3):
        # swapping 0 and 1 maps the forward cycle onto the backward one
        theta = Involution.from_pairs(TRI, [("0", "1")])
        assert detailed_balance_holds(cycle3, theta)
        assert entropy_production_markov(cycle3, theta) == pytest.approx(0.0, abs=1e-12)

    def test_flux_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            m = random_chain(rng, int(rng.integers(2, 6)))
            assert entropy_production_markov(m, Involution.identity(m.alphabet)) == pytest.approx(
                pairwise_ep(m), abs=1e-12)

    def test_general_theta_matches_identity_formula(self):
        # for theta = id the reversed-chain route and the flux formula agree
        rng = np.random.default_rng(4)
        for _ in range(20):
            m = random_chain(rng, 4, DNA)
            via_reversal = cross_entropy_markov(m, reversed_model(m, Involution.identity(DNA))) - entropy_rate(m)
            assert via_reversal == pytest.approx(pairwise_ep(m), abs=1e-12)

    def test_chargaff_chain(self, chargaff4):
        assert entropy_production_markov(chargaff4, CHARGAFF) == pytest.approx(0.0, abs=1e-12)
        assert entropy_production_markov(chargaff4, Involution.identity(DNA)) > 1.0

    def test_zero_flux_in_one_direction(self):
        # a transition without its reverse makes the identity reversal singular
        m = MarkovModel(TRI, [[0, 1, 0], [0, 0.5, 0.5], [1, 0, 0]])
        assert math.isinf(entropy_production_markov(m, Involution.identity(TRI)))

    def test_reversed_model_is_involutive(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = random_chain(rng, 4, DNA)
            twice = reversed_model(reversed_model(m, CHARGAFF), CHARGAFF)
            assert np.allclose(twice.P, m.P, atol=1e-13)
            assert np.allclose(twice.pi, m.pi, atol=1e-13)

    def test_reversible_chains(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            m = random_reversible_chain(rng, 4)
            assert detailed_balance_holds(m, Involution.identity(m.alphabet))
            assert entropy_production_markov(m, Involution.identity(m.alphabet)) < 1e-12


class TestCrossEntropy:
    def test_gibbs(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            p, q = random_chain(rng, 3, TRI), random_chain(rng, 3, TRI)
            assert cross_entropy_markov(p, q) >= entropy_rate(p) - 1e-14
            assert cross_entropy_markov(p, p) == pytest.approx(entropy_rate(p), abs=1e-14)

    def test_iid_closed_form(self):
        p = MarkovModel(BINARY, [[0.5, 0.5], [0.5, 0.5]])
        q = MarkovModel(BINARY, [[0.25, 0.75], [0.25, 0.75]])
        expect = -0.5 * math.log(0.25) - 0.5 * math.log(0.75)
        assert cross_entropy_markov(p, q) == pytest.approx(expect, abs=1e-15)
        assert brute_force_cross_entropy(p, q, 6) == pytest.approx(expect, abs=1e-12)

    def test_brute_entropy_converges(self, chargaff4):
        h = entropy_rate(chargaff4)
        gaps = [brute_force_entropy(chargaff4, n) - h for n in (1, 2, 4, 8)]
        assert all(g >= -1e-12 for g in gaps)
        assert gaps == sorted(gaps, reverse=True)

    def test_support_violation(self, cycle3):
        iid = MarkovModel(TRI, np.full((3, 3), 1 / 3))
        assert math.isinf(cross_entropy_markov(iid, cycle3))
        assert math.isfinite(cross_entropy_markov(cycle3, iid))


class TestMultiStep:
    def test_projection(self):
        rng = np.random.default_rng(8)
        cond = rng.dirichlet(np.ones(2), size=4) + 0.05
        cond /= cond.sum(axis=1, keepdims=True)
        lifted = multi_step_to_markov(2, cond, BINARY)
        assert lifted.alphabet.symbols == ("00", "01", "10", "11")
        # word probabilities of the order-2 chain, computed from the pair law
        pair = lifted.pi.reshape(2, 2)
        for word in itertools.product(range(2), repeat=5):
            p = pair[word[0], word[1]]
            for i in range(2, 5):
                p *= cond[word[i - 2] * 2 + word[i - 1], word[i]]
            assert project_word(lifted, list(word), 2, BINARY) == pytest.approx(p, rel=1e-12, abs=1e-300)

    def test_order_one(self):
        m = multi_step_to_markov(1, [[0.3, 0.7], [0.6, 0.4]], BINARY)
        assert isinstance(m, MarkovModel) and m.alphabet == BINARY


class TestModelFiles:
    def test_roundtrip(self, chargaff4):
        again = parse_model(format_model(chargaff4))
        assert np.allclose(again.P, chargaff4.P, rtol=0, atol=1e-15)

    def test_pmp_roundtrip(self, cycle3):
        e = PmpModel.from_markov(cycle3)
        again = parse_model(format_model(e))
        assert isinstance(again, PmpModel)
        assert np.allclose(all_marginals(again, 3), all_marginals(cycle3, 3), atol=1e-15)

    def test_small_drift_renormalised(self):
        m = parse_model("markov 0 1\n0.5 0.5000000001\n0.3 0.7\n")
        assert np.allclose(m.P.sum(axis=1), 1.0, atol=1e-15)

    def test_large_drift_rejected(self):
        with pytest.raises(ModelError, match="row sum"):
            parse_model("markov 0 1\n0.5 0.51\n0.3 0.7\n")

    def test_line_numbers(self):
        with pytest.raises(ModelError, match="line 3"):
            parse_model("markov 0 1\n0.5 0.5\n0.3 x\n")

    def test_comments_and_unknown_kind(self):
        parse_model("# header\nmarkov 0 1  # fair coin\n\n0.5 0.5\n0.5 0.5\n")
        with pytest.raises(ModelError, match="unknown model kind"):
            parse_model("semi 0 1\n")

    def test_reducible_file(self):
        with pytest.raises(ReducibleChainError):
            parse_model("markov 0 1\n1 0\n0 1\n")

    def test_psi_bound(self, cycle3):
        assert psi_star_zero_bound(cycle3) == pytest.approx(3.0)
