"""Exact generative sources: Markov and PMP (hidden Markov) measures.

Natural logarithms throughout, with ``0 log 0 = 0`` and ``p log(p/0) = +inf``
for ``p > 0``.

Sampling is pinned for reproducibility: the generator is numpy's PCG64
seeded from ``SeedSequence(seed)`` (or a spawned child sequence), one
double is drawn per emitted symbol with ``Generator.random``, and the
symbol is chosen by a left-to-right inverse-CDF scan over the current
conditional law.  Consequently ``sample(model, n, seed)`` is a prefix of
``sample(model, n + k, seed)``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .core import FiniteAlphabet, Involution, SymbolSequence, reverse_word

log = logging.getLogger(__name__)

ROW_TOL = 1e-12
STATIONARY_TOL = 1e-10
PARSE_TOL = 1e-9
ENUMERATION_LIMIT = 2**24


class ModelError(ValueError):
    """Invalid model parameters."""


class ReducibleChainError(ModelError):
    def __init__(self, classes: list[list[int]]):
        self.classes = classes
        desc = "; ".join("{" + ",".join(map(str, c)) + "}" for c in classes)
        super().__init__(f"chain is reducible; communicating classes: {desc}")


def _as_matrix(P, name="P") -> np.ndarray:
    P = np.array(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ModelError(f"{name} must be a square matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        raise ModelError(f"{name} must have finite nonnegative entries")
    return P


def communicating_classes(P) -> list[list[int]]:
    """Strongly connected components of the positive-entry digraph."""
    P = np.asarray(P)
    ncomp, labels = connected_components(P > 0, directed=True, connection="strong")
    classes = [sorted(np.flatnonzero(labels == c).tolist()) for c in range(ncomp)]
    return sorted(classes)


@dataclass(frozen=True)
class ChainFlags:
    irreducible: bool
    aperiodic: bool
    period: int | None


def _period(adj: np.ndarray, nodes: list[int]) -> int | None:
    # BFS levels inside one strongly connected class; the period is the gcd
    # of level[u] + 1 - level[v] over the class's edges.
    inside = set(nodes)
    level = {nodes[0]: 0}
    queue = [nodes[0]]
    g = 0
    while queue:
        u = queue.pop(0)
        for v in np.flatnonzero(adj[u]).tolist():
            if v not in inside:
                continue
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, abs(level[u] + 1 - level[v]))
    return g or None


def is_irreducible_aperiodic(P) -> ChainFlags:
    """Irreducibility and aperiodicity of a stochastic matrix.

    For a reducible matrix, ``aperiodic`` reports whether every class that
    carries a cycle has period 1 and ``period`` is ``None``.
    """
    P = _as_matrix(P)
    adj = P > 0
    classes = communicating_classes(P)
    periods = [_period(adj, c) for c in classes]
    if len(classes) == 1:
        p = periods[0]
        return ChainFlags(True, p == 1, p)
    return ChainFlags(False, all(p in (None, 1) for p in periods), None)


def stationary_distribution(P) -> np.ndarray:
    """Unique stationary law of an irreducible stochastic matrix (direct solve)."""
    P = _as_matrix(P)
    classes = communicating_classes(P)
    if len(classes) > 1:
        raise ReducibleChainError(classes)
    k = P.shape[0]
    A = P.T - np.eye(k)
    A[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_distribution_power(P, tol: float = 1e-12, max_iter: int = 10**6) -> np.ndarray:
    """Power iteration on the lazy chain ``(I + P) / 2``; cross-check only."""
    P = _as_matrix(P)
    k = P.shape[0]
    lazy = 0.5 * (np.eye(k) + P)
    pi = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        nxt = pi @ lazy
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt / nxt.sum()
        pi = nxt
    raise ModelError("power iteration did not converge")


def _check_rows(P: np.ndarray, name: str) -> None:
    err = np.max(np.abs(P.sum(axis=1) - 1.0))
    if err > ROW_TOL:
        raise ModelError(f"rows of {name} must sum to 1 (max deviation {err:.3g})")


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Stationary Markov measure generated by ``(pi, P)``."""

    alphabet: FiniteAlphabet
    P: np.ndarray
    pi: np.ndarray = None

    def __post_init__(self):
        P = _as_matrix(self.P)
        if P.shape[0] != self.alphabet.size:
            raise ModelError(f"P is {P.shape[0]}x{P.shape[0]} but alphabet has {self.alphabet.size} letters")
        _check_rows(P, "P")
        if self.pi is None:
            pi = stationary_distribution(P)
        else:
            pi = np.array(self.pi, dtype=float)
            if pi.shape != (P.shape[0],) or np.any(pi < 0) or abs(pi.sum() - 1.0) > ROW_TOL:
                raise ModelError("pi must be a probability vector matching P")
            res = np.max(np.abs(pi @ P - pi))
            if res > STATIONARY_TOL:
                raise ModelError(f"pi is not stationary for P (residual {res:.3g})")
        P.flags.writeable = False
        pi.flags.writeable = False
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)

    @property
    def full_support(self) -> bool:
        return bool(self.pi.min() > 0)

    @property
    def transition_matrix(self) -> np.ndarray:
        return self.P


@dataclass(frozen=True, eq=False)
class PmpModel:
    """Positive-matrix-product measure with marginals ``pi P_a1 ... P_an 1``."""

    alphabet: FiniteAlphabet
    pi: np.ndarray
    Pa: np.ndarray  # shape (|A|, d, d)
    d: int = field(init=False)

    def __post_init__(self):
        Pa = np.array(self.Pa, dtype=float)
        pi = np.array(self.pi, dtype=float).ravel()
        if Pa.ndim != 3 or Pa.shape[0] != self.alphabet.size or Pa.shape[1] != Pa.shape[2]:
            raise ModelError(f"Pa must have shape (|A|, d, d), got {Pa.shape}")
        d = Pa.shape[1]
        if pi.shape != (d,):
            raise ModelError(f"pi must have length {d}")
        if np.any(Pa < 0) or not np.all(np.isfinite(Pa)):
            raise ModelError("all P_a must be entrywise nonnegative")
        if np.any(pi <= 0) or abs(pi.sum() - 1.0) > ROW_TOL:
            raise ModelError("pi must be a strictly positive probability vector")
        P = Pa.sum(axis=0)
        _check_rows(P, "sum of P_a")
        res = np.max(np.abs(pi @ P - pi))
        if res > STATIONARY_TOL:
            raise ModelError(f"pi is not stationary for sum of P_a (residual {res:.3g})")
        Pa.flags.writeable = False
        pi.flags.writeable = False
        object.__setattr__(self, "Pa", Pa)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "d", d)

    @property
    def transition_matrix(self) -> np.ndarray:
        return self.Pa.sum(axis=0)

    @classmethod
    def from_markov(cls, model: MarkovModel) -> "PmpModel":
        """Embed a Markov chain: ``(P_a)_ij = P_ij [j == a]``."""
        k = model.alphabet.size
        Pa = np.zeros((k, k, k))
        for a in range(k):
            Pa[a, :, a] = model.P[:, a]
        return cls(model.alphabet, model.pi, Pa)


Model = Union[MarkovModel, PmpModel]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def sample(model: Model, length: int, seed) -> SymbolSequence:
    """Draw ``length`` symbols from the stationary model, deterministically."""
    if length < 1:
        raise ValueError("length must be >= 1")
    u = _rng(seed).random(length)
    if isinstance(model, MarkovModel):
        data = _kernels.markov_walk(u, np.ascontiguousarray(model.pi), np.ascontiguousarray(model.P))
    else:
        Pa = np.ascontiguousarray(model.Pa)
        data = _kernels.pmp_walk(u, np.ascontiguousarray(model.pi), Pa, Pa.sum(axis=2))
    return SymbolSequence(model.alphabet, data)


def _word_indices(model: Model, word) -> np.ndarray:
    if isinstance(word, SymbolSequence):
        if word.alphabet != model.alphabet:
            raise ModelError("word is over a different alphabet")
        return word.data.astype(np.int64)
    if isinstance(word, str):
        if model.alphabet.single_char:
            return np.array([model.alphabet.index(c) for c in word], dtype=np.int64)
        return np.array([model.alphabet.index(t) for t in word.split()], dtype=np.int64)
    return np.asarray(word, dtype=np.int64)


def marginal(model: Model, word) -> float:
    """Exact probability of the cylinder ``[word]``."""
    a = _word_indices(model, word)
    if a.size == 0:
        raise ValueError("marginal of the empty word is undefined")
    if isinstance(model, MarkovModel):
        p = model.pi[a[0]]
        for s, t in zip(a[:-1], a[1:]):
            p *= model.P[s, t]
        return float(p)
    v = model.pi.copy()
    for s in a:
        v = v @ model.Pa[s]
    return float(v.sum())


def all_marginals(model: Model, n: int) -> np.ndarray:
    """Marginals of every word of length ``n``, as an array of shape ``(|A|,)*n``."""
    k = model.alphabet.size
    if n < 1:
        raise ValueError("n must be >= 1")
    if k**n > ENUMERATION_LIMIT:
        raise ValueError(f"enumerating {k}^{n} words exceeds the limit {ENUMERATION_LIMIT}")
    if isinstance(model, MarkovModel):
        M = model.pi.copy()
        for _ in range(n - 1):
            M = M[..., None] * model.P
        return M
    V = np.einsum("i,aij->aj", model.pi, model.Pa)
    for _ in range(n - 1):
        V = np.einsum("...i,aij->...aj", V, model.Pa)
    return V.sum(axis=-1)


def _reverse_marginals(M: np.ndarray, theta: Involution) -> np.ndarray:
    # out[a_1..a_n] = M[theta(a_n), ..., theta(a_1)]
    n = M.ndim
    R = M.transpose(tuple(range(n - 1, -1, -1)))
    idx = np.array(theta.mapping)
    return R[np.ix_(*([idx] * n))]


def reversed_model(model: MarkovModel, theta: Involution, verify_upto: int = 5) -> MarkovModel:
    """The Markov chain whose marginals are ``P_n(reverse_word(a, theta))``."""
    if theta.alphabet != model.alphabet:
        raise ModelError("involution is over a different alphabet")
    if not model.full_support:
        raise ModelError("reversal of a chain without full stationary support is not Markov")
    t = np.array(theta.mapping)
    pi, P = model.pi, model.P
    pi_q = pi[t]
    # Q[a, b] = pi[t b] P[t b, t a] / pi[t a]
    Q = (pi[t][None, :] * P[np.ix_(t, t)].T) / pi[t][:, None]
    Q = Q / Q.sum(axis=1, keepdims=True)
    out = MarkovModel(model.alphabet, Q, pi_q)
    k = model.alphabet.size
    for n in range(1, verify_upto + 1):
        if k**n > 4096:
            break
        expect = _reverse_marginals(all_marginals(model, n), theta)
        got = all_marginals(out, n)
        if not np.allclose(got, expect, rtol=1e-9, atol=1e-14):
            raise AssertionError(f"reversed model fails the marginal identity at n={n}")
    return out


def _xlogy_neg(p: np.ndarray, q: np.ndarray) -> float:
    """``-sum p log q`` with ``0 log . = 0`` and ``+inf`` on ``p > 0, q = 0``."""
    pos = p > 0
    if np.any(q[pos] <= 0):
        return math.inf
    return float(-np.sum(p[pos] * np.log(q[pos])))


def entropy_rate(model: MarkovModel) -> float:
    """``-sum_a pi_a sum_b P_ab log P_ab``."""
    flux = model.pi[:, None] * model.P
    return max(_xlogy_neg(flux, model.P), 0.0)


def cross_entropy_markov(p_model: MarkovModel, q_model: MarkovModel) -> float:
    """Per-symbol cross entropy of the first chain with respect to the second."""
    if p_model.alphabet != q_model.alphabet:
        raise ModelError("cross entropy between models over different alphabets")
    if np.any((p_model.pi > 0) & (q_model.pi <= 0)):
        return math.inf
    flux = p_model.pi[:, None] * p_model.P
    return _xlogy_neg(flux, q_model.P)


def _ep_identity(model: MarkovModel) -> float:
    F = model.pi[:, None] * model.P
    Ft = F.T
    fwd, bwd = F > 0, Ft > 0
    if np.any(fwd != bwd):
        return math.inf
    both = fwd & bwd
    total = 0.5 * np.sum((F[both] - Ft[both]) * np.log(F[both] / Ft[both]))
    return max(float(total), 0.0)


def entropy_production_markov(model: MarkovModel, theta: Involution) -> float:
    """Entropy production of a stationary chain under the reversal by ``theta``.

    ``theta = id`` uses the pairwise flux formula; other involutions go
    through :func:`reversed_model` as cross entropy minus entropy.
    """
    if theta.alphabet != model.alphabet:
        raise ModelError("involution is over a different alphabet")
    if theta.is_identity:
        return _ep_identity(model)
    t = np.array(theta.mapping)
    support = model.pi > 0
    if not np.array_equal(support, support[t]):
        log.info("stationary support is not theta-invariant; entropy production is +inf")
        return math.inf
    if not support.all():
        keep = np.flatnonzero(support)
        sub_alpha = FiniteAlphabet(tuple(model.alphabet.symbols[i] for i in keep))
        P = model.P[np.ix_(keep, keep)]
        pos = {int(i): j for j, i in enumerate(keep)}
        model = MarkovModel(sub_alpha, P / P.sum(axis=1, keepdims=True), model.pi[keep])
        theta = Involution(sub_alpha, tuple(pos[int(t[i])] for i in keep))
    Q = reversed_model(model, theta)
    ep = cross_entropy_markov(model, Q) - entropy_rate(model)
    return max(ep, 0.0)


def detailed_balance_holds(model: MarkovModel, theta: Involution, tol: float = 1e-12) -> bool:
    """``pi_a P_ab == pi_{t b} P_{t b, t a}`` for all a, b."""
    t = np.array(theta.mapping)
    F = model.pi[:, None] * model.P
    return bool(np.allclose(F, F[np.ix_(t, t)].T, rtol=0, atol=tol))


def brute_force_cross_entropy(p_model: Model, q_model: Model, n: int) -> float:
    """``-(1/n) sum_{a in A^n} P_n(a) log Q_n(a)`` by full enumeration."""
    if p_model.alphabet != q_model.alphabet:
        raise ModelError("cross entropy between models over different alphabets")
    return _xlogy_neg(all_marginals(p_model, n).ravel(), all_marginals(q_model, n).ravel()) / n


def brute_force_entropy(model: Model, n: int) -> float:
    return brute_force_cross_entropy(model, model, n)


def psi_star_zero_bound(model: Model) -> float:
    """Upper bound on the psi*(0) mixing coefficient."""
    pmin = float(np.min(model.pi))
    if pmin <= 0:
        raise ModelError("psi*(0) bound needs a strictly positive stationary vector")
    if isinstance(model, MarkovModel):
        return 1.0 / pmin
    return 1.0 / pmin**2


def multi_step_to_markov(k: int, cond, alphabet: FiniteAlphabet) -> MarkovModel:
    """Lift an order-``k`` chain to a first-order chain on ``A^k``.

    ``cond`` holds the law of the next letter given the last ``k`` letters,
    with shape ``(|A|,)*k + (|A|,)`` or ``(|A|^k, |A|)``.
    """
    if k < 1:
        raise ModelError("order must be >= 1")
    A = alphabet.size
    cond = np.asarray(cond, dtype=float).reshape(A**k, A)
    if np.any(cond < 0):
        raise ModelError("conditional probabilities must be nonnegative")
    err = np.max(np.abs(cond.sum(axis=1) - 1.0))
    if err > ROW_TOL:
        raise ModelError(f"conditional rows must sum to 1 (max deviation {err:.3g})")
    if k == 1:
        return MarkovModel(alphabet, cond)
    words = list(itertools.product(range(A), repeat=k))
    P = np.zeros((A**k, A**k))
    for i, w in enumerate(words):
        tail = 0
        for c in w[1:]:
            tail = tail * A + c
        for b in range(A):
            P[i, tail * A + b] = cond[i, b]
    sep = "" if alphabet.single_char else "."
    tokens = tuple(sep.join(alphabet.symbols[c] for c in w) for w in words)
    return MarkovModel(FiniteAlphabet(tokens), P)


def project_word(lifted: MarkovModel, word: str | list[int], k: int, base: FiniteAlphabet) -> float:
    """Probability of a base-alphabet word (length >= k) under a lifted chain."""
    a = [base.index(c) for c in word] if isinstance(word, str) else list(word)
    A = base.size
    if len(a) < k:
        raise ValueError("word shorter than the lift order")
    states = []
    for i in range(len(a) - k + 1):
        s = 0
        for c in a[i : i + k]:
            s = s * A + c
        states.append(s)
    return marginal(lifted, states)


# ---------------------------------------------------------------------------
# Plain-text model files.
#
#   markov <tok> <tok> ...        header: kind and alphabet tokens
#   <row of |A| probabilities>    one line per state
#
#   pmp <d> <tok> <tok> ...
#   <pi: d entries>
#   <d rows of d entries>         repeated once per letter, in alphabet order
#
# '#' starts a comment; blank lines are ignored.  Rows whose sums deviate
# from 1 by more than 1e-9 are rejected, smaller drift is renormalised.


def _renormalise(M: np.ndarray, what: str) -> np.ndarray:
    sums = M.sum(axis=-1, keepdims=True)
    err = float(np.max(np.abs(sums - 1.0)))
    if err > PARSE_TOL:
        raise ModelError(f"{what}: row sum off by {err:.3g} (> {PARSE_TOL})")
    return M / sums


def parse_model(text: str) -> Model:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body.split()))
    if not lines:
        raise ModelError("empty model file")
    _, head = lines[0]
    kind = head[0].lower()

    def numbers(row, count, lineno):
        if len(row) != count:
            raise ModelError(f"line {lineno}: expected {count} numbers, got {len(row)}")
        try:
            return [float(v) for v in row]
        except ValueError as exc:
            raise ModelError(f"line {lineno}: {exc}") from None

    if kind == "markov":
        alphabet = FiniteAlphabet(tuple(head[1:]))
        k = alphabet.size
        body = lines[1:]
        if len(body) != k:
            raise ModelError(f"markov model needs {k} rows, got {len(body)}")
        P = np.array([numbers(row, k, ln) for ln, row in body])
        return MarkovModel(alphabet, _renormalise(P, "transition matrix"))
    if kind == "pmp":
        if len(head) < 2:
            raise ModelError("pmp header must give the hidden dimension")
        try:
            d = int(head[1])
        except ValueError:
            raise ModelError(f"bad hidden dimension {head[1]!r}") from None
        alphabet = FiniteAlphabet(tuple(head[2:]))
        k = alphabet.size
        body = lines[1:]
        if len(body) != 1 + k * d:
            raise ModelError(f"pmp model needs {1 + k * d} rows, got {len(body)}")
        pi = np.array(numbers(body[0][1], d, body[0][0]))
        Pa = np.array([numbers(row, d, ln) for ln, row in body[1:]]).reshape(k, d, d)
        P = _renormalise(Pa.sum(axis=0), "sum of P_a")
        scale = P.sum(axis=1) / Pa.sum(axis=0).sum(axis=1)
        Pa = Pa * scale[None, :, None]
        pi = pi / pi.sum()
        return PmpModel(alphabet, pi, Pa)
    raise ModelError(f"unknown model kind {head[0]!r} (expected markov or pmp)")


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def format_model(model: Model) -> str:
    fmt = lambda row: " ".join(repr(float(v)) for v in row)
    if isinstance(model, MarkovModel):
        lines = ["markov " + " ".join(model.alphabet.symbols)]
        lines += [fmt(r) for r in model.P]
    else:
        lines = [f"pmp {model.d} " + " ".join(model.alphabet.symbols), fmt(model.pi)]
        for a in range(model.alphabet.size):
            lines += [fmt(r) for r in model.Pa[a]]
    return "\n".join(lines) + "\n"
