"""Distributed computation of the Babai point.

Sensor ``m`` observes only ``x_m`` (coordinates of the upper-triangular
frame) and sends ``(Ũ_m, s_m)``: ``Ũ_m = [x_m / v_mm]`` plus an index into
the set ``𝒮_m`` of possible scaled fractional interference values. The
central node rebuilds the nearest-plane coefficients exactly, last row first.

Why the encoder is a lookup: write ``y = x_m / v_mm``, ``y + 1/2 = Ũ + φ``
with ``0 <= φ < 1``, and split the interference ``ν = Σ_{l>m} u_l v_ml / v_mm``
into ``⌊ν⌋ + f/q_m``. Then ``u_m = [y - ν] = Ũ - ⌊ν⌋ - [φ < f/q_m]`` and
``φ < f/q_m`` iff ``f > ⌊φ q_m⌋``. Sending ``s = max{s ∈ 𝒮_m : s <= ⌊φ q_m⌋}``
preserves that comparison for every ``f ∈ 𝒮_m``, so the decoder applies
``u_m = Ũ - ⌊ν⌋ - [f > s]``. This is the largest ``s ∈ 𝒮_m`` with
``[y - s/q_m] = [y]``.

All protocol-side bookkeeping (``q_m``, ``f_m``, ``s_m``) is in integers.
"""

from __future__ import annotations

import math
import queue
import re
import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .babai import babai_coefficients
from .basis import LatticeBasis
from .entropy import conditional_entropy_estimate, entropy_estimate, entropy_from_probs
from .errors import (
    BudgetExceeded,
    MissingMessage,
    NoRationalWithinTolerance,
    UnsupportedForExact,
)
from .exact import rational_reconstruct

DEFAULT_BUDGET = 10**7
DEFAULT_FALLBACK_SAMPLES = 10**6


# ---------------------------------------------------------------- sources


@dataclass(frozen=True)
class UniformSource:
    """Independent coordinates, each uniform on ``[-A/2, A/2)``."""

    A: float = 5.0

    def sample(self, rng, N, R):
        return rng.uniform(-self.A / 2, self.A / 2, size=(N, R.shape[0]))

    def __str__(self):
        return f"uniform:A={self.A:g}"


@dataclass(frozen=True)
class GaussianSource:
    """A lattice point with coefficients uniform in ``{-K..K}`` plus isotropic noise."""

    sigma: float
    K: int = 2

    def sample(self, rng, N, R):
        n = R.shape[0]
        U = rng.integers(-self.K, self.K + 1, size=(N, n))
        return U @ R.T + self.sigma * rng.standard_normal((N, n))

    def __str__(self):
        return f"gauss:sigma={self.sigma:g},K={self.K}"


Source = Union[UniformSource, GaussianSource]


def parse_source(text: str) -> Source:
    """``uniform`` / ``uniform:A=5`` / ``gauss:sigma=0.3[,K=2]``."""
    kind, _, rest = text.strip().partition(":")
    params = {}
    for part in filter(None, re.split(r"[,;]", rest)):
        k, eq, v = part.partition("=")
        if not eq:
            raise ValueError(f"bad source parameter {part!r}")
        params[k.strip()] = float(v)
    kind = kind.lower()
    if kind == "uniform":
        unknown = set(params) - {"A"}
        if unknown:
            raise ValueError(f"unknown uniform parameters {sorted(unknown)}")
        A = params.get("A", 5.0)
        if A <= 0:
            raise ValueError("A must be positive")
        return UniformSource(A)
    if kind in ("gauss", "gaussian"):
        if "sigma" not in params or params["sigma"] <= 0:
            raise ValueError("gaussian source needs sigma > 0")
        unknown = set(params) - {"sigma", "K"}
        if unknown:
            raise ValueError(f"unknown gaussian parameters {sorted(unknown)}")
        return GaussianSource(params["sigma"], int(params.get("K", 2)))
    raise ValueError(f"unknown source kind {kind!r}")


# ---------------------------------------------------------------- ratio rows


@dataclass(frozen=True)
class RationalRatioRow:
    """Row ``m`` (0-based): exact ``v_ml / v_mm`` for ``l > m`` and ``q_m``."""

    m: int
    ratios: dict
    q: int

    def scaled(self) -> dict:
        """Integers ``q_m * v_ml / v_mm``."""
        out = {}
        for l, r in self.ratios.items():
            v = r * self.q
            assert v.denominator == 1
            out[l] = int(v)
        return out


def ratio_rows(B: LatticeBasis, max_den: int = 10**6, tol: float = 1e-9):
    """Exact row ratios of the triangular form of ``B``.

    Uses the exact entries when ``B`` is itself upper triangular and every
    ratio is rational; otherwise recovers each ratio from the floating ``R``.
    """
    T = B.triangular()
    R = T.R
    n = B.n
    rows = []
    for m in range(n):
        ratios = {}
        for l in range(m + 1, n):
            r = None
            if T.exact is not None:
                num, den = T.exact_entry(m, l), T.exact_entry(m, m)
                if num.is_zero:
                    continue
                r = num.ratio(den)
            if r is None:
                x = R[m, l] / R[m, m]
                if abs(x) <= 1e-14 * max(1.0, abs(R[m, l])):
                    continue
                try:
                    r = rational_reconstruct(x, max_den, tol)
                except NoRationalWithinTolerance as e:
                    raise NoRationalWithinTolerance(f"row {m + 1}, column {l + 1}: {e}") from None
            if r != 0:
                ratios[l] = r
        q = math.lcm(*(r.denominator for r in ratios.values())) if ratios else 1
        rows.append(RationalRatioRow(m, ratios, q))
    return rows


# ---------------------------------------------------------------- reachable sets


@dataclass(frozen=True)
class ReachableSet:
    values: tuple
    q: int
    provenance: str

    def __post_init__(self):
        vals = tuple(sorted(set(int(v) for v in self.values) | {0}))
        if vals[0] < 0 or vals[-1] >= self.q:
            raise ValueError("reachable values must lie in 0..q-1")
        object.__setattr__(self, "values", vals)

    def __contains__(self, s):
        return s in self.values

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)


def _uniform_ranges(R, A):
    d = np.diag(R)
    return -A / (2 * d), A / (2 * d)


def _enumerate_uniform(R, rows, A, budget):
    """Exact reachable sets for every row by depth-first search over the
    downstream coefficients a uniform source can produce."""
    n = R.shape[0]
    lo, hi = _uniform_ranges(R, A)
    scaled = [r.scaled() for r in rows]
    sets = [set() for _ in range(n)]
    u = np.zeros(n, dtype=np.int64)
    count = [0]

    def record(m):
        N = sum(int(u[l]) * c for l, c in scaled[m].items())
        sets[m].add(N % rows[m].q)

    def rec(i):
        # u_i..u_{n-1} are fixed: they determine the interference of row i-1
        m = i - 1
        record(m)
        if m == 0:
            return
        nu = float(R[m, i:] @ u[i:]) / R[m, m]
        for k in range(math.floor(lo[m] - nu - 0.5) + 1, math.ceil(hi[m] - nu + 0.5)):
            count[0] += 1
            if count[0] > budget:
                raise BudgetExceeded
            u[m] = k
            rec(m)
        u[m] = 0

    sets[n - 1].add(0)
    if n > 1:
        i = n - 1
        # the last row has no interference
        for k in range(math.floor(lo[i] - 0.5) + 1, math.ceil(hi[i] + 0.5)):
            count[0] += 1
            if count[0] > budget:
                raise BudgetExceeded
            u[i] = k
            rec(i)
    return sets


def _sampled_sets(R, rows, source, samples, seed):
    rng = np.random.default_rng(seed)
    n = R.shape[0]
    sets = [set([0]) for _ in range(n)]
    scaled = [r.scaled() for r in rows]
    done = 0
    while done < samples:
        N = min(100000, samples - done)
        U = babai_coefficients(R, source.sample(rng, N, R))
        for m in range(n):
            acc = np.zeros(N, dtype=object if rows[m].q > 2**31 else np.int64)
            for l, c in scaled[m].items():
                acc = acc + U[:, l] * c
            sets[m].update(int(v) for v in np.unique(acc % rows[m].q))
        done += N
    return sets


def reachable_sets(B: LatticeBasis, source: Optional[Source] = None, rows=None,
                   budget: int = DEFAULT_BUDGET, fallback_samples: Optional[int] = DEFAULT_FALLBACK_SAMPLES,
                   seed: int = 0):
    """``𝒮_m`` for every row of the triangular form of ``B``.

    With no source, or a Gaussian one (unbounded support), every residue is
    possible and the full set is returned. For a uniform source the
    downstream coefficients are enumerated exactly; if that exceeds
    ``budget`` nodes the sets are estimated from ``fallback_samples`` draws.
    """
    rows = rows if rows is not None else ratio_rows(B)
    R = B.triangular().R
    qs = [r.q for r in rows]
    if source is None or isinstance(source, GaussianSource):
        return [ReachableSet(range(q), q, "full" if q > 1 else "exact-enumeration") for q in qs]
    try:
        sets = _enumerate_uniform(R, rows, source.A, budget)
        tag = "exact-enumeration"
    except BudgetExceeded:
        if not fallback_samples:
            raise BudgetExceeded(f"reachable-set enumeration exceeded {budget} nodes") from None
        warnings.warn("reachable-set enumeration over budget; falling back to sampling", RuntimeWarning)
        sets = _sampled_sets(R, rows, source, fallback_samples, seed)
        tag = "sampled"
    return [ReachableSet(s, q, tag) for s, q in zip(sets, qs)]


def reachable_set(B: LatticeBasis, m: int, source: Optional[Source] = None, **kw) -> ReachableSet:
    """``𝒮_m`` for the 0-based row ``m``."""
    return reachable_sets(B, source, **kw)[m]


# ---------------------------------------------------------------- codec


@dataclass(frozen=True)
class DbpMessage:
    m: int
    u_tilde: int
    s: int


def encode_batch(x_m, r_mm: float, S: ReachableSet):
    """Vectorised encoder: ``(Ũ_m, s_m)`` arrays for the observations ``x_m``."""
    y = np.asarray(x_m, dtype=float) / r_mm + 0.5
    ut = np.floor(y)
    phi = y - ut
    t = np.floor(phi * S.q).astype(np.int64)
    t = np.minimum(t, S.q - 1)  # guards phi*q rounding up to q
    vals = S.as_array()
    s = vals[np.searchsorted(vals, t, side="right") - 1]
    return ut.astype(np.int64), s


def encode(m: int, x_m: float, B: LatticeBasis, S: ReachableSet) -> DbpMessage:
    ut, s = encode_batch([x_m], float(B.triangular().R[m, m]), S)
    return DbpMessage(m, int(ut[0]), int(s[0]))


def decode_batch(u_tilde, s, rows):
    """Central-node decoder on arrays of shape ``(N, n)``, last row first."""
    u_tilde = np.asarray(u_tilde)
    s = np.asarray(s)
    N, n = u_tilde.shape
    big = any(abs(c) * (abs(u_tilde).max() + 2) * n > 2**62 for r in rows for c in r.scaled().values()) if N else False
    dt = object if big else np.int64
    U = np.zeros((N, n), dtype=dt)
    for m in range(n - 1, -1, -1):
        row = rows[m]
        acc = np.zeros(N, dtype=dt)
        for l, c in row.scaled().items():
            acc = acc + U[:, l] * c
        fl, f = acc // row.q, acc % row.q
        U[:, m] = u_tilde[:, m].astype(dt) - fl - (f > s[:, m].astype(dt))
    return U


def decode(messages, B: LatticeBasis, rows=None) -> np.ndarray:
    """Decode one observation from its ``n`` messages (any arrival order)."""
    rows = rows if rows is not None else ratio_rows(B)
    n = len(rows)
    by_m = {msg.m: msg for msg in messages}
    missing = [m for m in range(n) if m not in by_m]
    if missing:
        raise MissingMessage(f"no message from sensor(s) {[m + 1 for m in missing]}")
    ut = np.array([[by_m[m].u_tilde for m in range(n)]], dtype=np.int64)
    s = np.array([[by_m[m].s for m in range(n)]], dtype=np.int64)
    return decode_batch(ut, s, rows)[0]


# ---------------------------------------------------------------- simulation


@dataclass
class SimulationReport:
    trials: int
    agreement: float
    mismatches: int
    q: list
    reachable: list
    s_frequencies: list
    max_s: list
    transcript: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "agreement": self.agreement,
            "mismatches": self.mismatches,
            "q": self.q,
            "reachable_sets": [{"values": list(r.values), "provenance": r.provenance} for r in self.reachable],
            "s_frequencies": [{str(k): v for k, v in f.items()} for f in self.s_frequencies],
            "max_s": self.max_s,
            "transcript": self.transcript,
        }


class SensorNode(threading.Thread):
    """Encodes batches of its own coordinate and posts them to the central node."""

    def __init__(self, m, r_mm, S, inbox, outbox):
        super().__init__(daemon=True)
        self.m, self.r_mm, self.S = m, r_mm, S
        self.inbox, self.outbox = inbox, outbox

    def run(self):
        while True:
            item = self.inbox.get()
            if item is None:
                return
            batch, x_m = item
            ut, s = encode_batch(x_m, self.r_mm, self.S)
            self.outbox.put((batch, self.m, ut, s))


class CentralNode(threading.Thread):
    """Buffers messages keyed by ``(batch, m)`` and decodes each complete batch."""

    def __init__(self, n, rows, inbox, nbatches):
        super().__init__(daemon=True)
        self.n, self.rows, self.inbox, self.nbatches = n, rows, inbox, nbatches
        self.results = {}
        self.error = None

    def run(self):
        pending = {}
        try:
            while len(self.results) < self.nbatches:
                batch, m, ut, s = self.inbox.get()
                pending.setdefault(batch, {})[m] = (ut, s)
                if len(pending[batch]) == self.n:
                    got = pending.pop(batch)
                    UT = np.column_stack([got[k][0] for k in range(self.n)])
                    S = np.column_stack([got[k][1] for k in range(self.n)])
                    self.results[batch] = (UT, S, decode_batch(UT, S, self.rows))
        except Exception as e:  # surfaced by simulate()
            self.error = e


def simulate(B: LatticeBasis, source: Source, trials: int, seed: int, reach=None,
             batch_size: int = 20000, transcript_limit: int = 20) -> SimulationReport:
    """Run sensors and the central node on ``trials`` seeded observations and
    compare the decoded coefficients with direct nearest-plane decoding."""
    T = B.triangular()
    R = T.R
    n = B.n
    rows = ratio_rows(B)
    reach = reach if reach is not None else reachable_sets(B, source, rows=rows, seed=seed)
    rng = np.random.default_rng(seed)
    X = source.sample(rng, trials, R)
    nb = max(1, math.ceil(trials / batch_size))
    to_cn = queue.Queue()
    cn = CentralNode(n, rows, to_cn, nb)
    cn.start()
    inboxes = [queue.Queue() for _ in range(n)]
    sensors = [SensorNode(m, float(R[m, m]), reach[m], inboxes[m], to_cn) for m in range(n)]
    for sn in sensors:
        sn.start()
    # deliver in the order the decoder consumes them: last sensor first
    for b in range(nb):
        sl = slice(b * batch_size, (b + 1) * batch_size)
        for m in range(n - 1, -1, -1):
            inboxes[m].put((b, X[sl, m]))
    for m in range(n):
        inboxes[m].put(None)
    for sn in sensors:
        sn.join()
    cn.join()
    if cn.error is not None:
        raise cn.error
    UT = np.vstack([cn.results[b][0] for b in range(nb)])
    S = np.vstack([cn.results[b][1] for b in range(nb)])
    U = np.vstack([cn.results[b][2] for b in range(nb)]).astype(np.int64)
    ref = babai_coefficients(R, X)
    bad = int(np.sum(np.any(U != ref, axis=1)))
    freqs = []
    for m in range(n):
        vals, cnt = np.unique(S[:, m], return_counts=True)
        freqs.append({int(v): int(c) for v, c in zip(vals, cnt)})
    transcript = []
    for t in range(min(transcript_limit, trials)):
        transcript.append({
            "x": [float(v) for v in X[t]],
            "messages": [{"m": m + 1, "u_tilde": int(UT[t, m]), "s": int(S[t, m])} for m in range(n - 1, -1, -1)],
            "u": [int(v) for v in U[t]],
            "babai": [int(v) for v in ref[t]],
        })
    return SimulationReport(
        trials, 1.0 - bad / trials if trials else 1.0, bad, [r.q for r in rows], list(reach), freqs,
        [int(S[:, m].max()) if trials else 0 for m in range(n)], transcript,
    )


# ---------------------------------------------------------------- rates


@dataclass
class RateReport:
    """Per-sensor entropies in bits (sensor order 1..n)."""

    H_U: list
    H_S_given_U: list
    H_US: list
    q: list
    log2_A_terms: float
    neg_log2_det: float
    sum_log2_q: float
    method: str
    samples: Optional[int] = None
    se_US: Optional[list] = None
    se_S_given_U: Optional[list] = None
    provenance: list = field(default_factory=list)

    @property
    def sum_rate(self) -> float:
        return float(sum(self.H_US))

    @property
    def extra_rate(self) -> float:
        """``Σ H(S_i | Ũ_i)``, the cost of the misaligned Babai cells."""
        return float(sum(self.H_S_given_U))

    @property
    def bound(self) -> float:
        return self.log2_A_terms + self.neg_log2_det + self.sum_log2_q

    @property
    def sum_rate_se(self) -> Optional[float]:
        if self.se_US is None:
            return None
        return float(np.sqrt(np.sum(np.square(self.se_US))))

    def to_json(self) -> dict:
        d = {
            "method": self.method,
            "H_U": self.H_U,
            "H_S_given_U": self.H_S_given_U,
            "H_US": self.H_US,
            "q": self.q,
            "sum_rate": self.sum_rate,
            "extra_rate": self.extra_rate,
            "bound_terms": {
                "n_log2_A": self.log2_A_terms,
                "neg_log2_det": self.neg_log2_det,
                "sum_log2_q": self.sum_log2_q,
            },
            "bound": self.bound,
            "reachable_provenance": self.provenance,
        }
        if self.samples is not None:
            d["samples"] = self.samples
            d["se_H_US"] = self.se_US
            d["se_H_S_given_U"] = self.se_S_given_U
            d["sum_rate_se"] = self.sum_rate_se
        return d


def _coordinate_law(lo, hi, S: ReachableSet):
    """Exact joint law of ``(Ũ, S)`` when ``y = x / v_mm`` is uniform on ``[lo, hi)``.

    ``Ũ = k`` and ``s = s_j`` exactly when ``y`` lies in
    ``[k - 1/2 + s_j/q, k - 1/2 + s_{j+1}/q)``.
    """
    q = S.q
    vals = list(S.values)
    edges = [Fraction(v, q) for v in vals] + [Fraction(1)]
    width = hi - lo
    probs = {}
    for k in range(math.floor(lo + 0.5), math.floor(hi + 0.5) + 1):
        for j, s in enumerate(vals):
            a = max(lo, k - 0.5 + float(edges[j]))
            b = min(hi, k - 0.5 + float(edges[j + 1]))
            if b > a:
                probs[(k, s)] = probs.get((k, s), 0.0) + (b - a) / width
    return probs


def rate_exact_uniform(B: LatticeBasis, A: float = 5.0, reach=None) -> RateReport:
    """Exact per-sensor entropies for the product-uniform source on ``[-A/2, A/2)^n``.

    ``(Ũ_i, S_i)`` depends on ``x_i`` alone, so its law is a sum of interval
    lengths. Needs exactly enumerated reachable sets.
    """
    rows = ratio_rows(B)
    src = UniformSource(A)
    reach = reach if reach is not None else reachable_sets(B, src, rows=rows, fallback_samples=None)
    if any(r.provenance != "exact-enumeration" for r in reach):
        raise UnsupportedForExact("exact rates need exactly enumerated reachable sets")
    R = B.triangular().R
    n = B.n
    H_U, H_SU, H_US = [], [], []
    for i in range(n):
        d = R[i, i]
        law = _coordinate_law(-A / (2 * d), A / (2 * d), reach[i])
        pu = {}
        for (k, _), p in law.items():
            pu[k] = pu.get(k, 0.0) + p
        hus = entropy_from_probs(list(law.values()))
        hu = entropy_from_probs(list(pu.values()))
        H_US.append(hus)
        H_U.append(hu)
        H_SU.append(max(hus - hu, 0.0))
    return RateReport(
        H_U, H_SU, H_US, [r.q for r in rows],
        n * math.log2(A), -math.log2(B.det), float(sum(math.log2(r.q) for r in rows)),
        "exact", provenance=[r.provenance for r in reach],
    )


def rate_monte_carlo(B: LatticeBasis, source: Source, samples: int, seed: int, reach=None) -> RateReport:
    """Plug-in estimates of the per-sensor entropies from seeded samples."""
    if samples < 2:
        raise ValueError("need at least two samples")
    rows = ratio_rows(B)
    reach = reach if reach is not None else reachable_sets(B, source, rows=rows, seed=seed)
    R = B.triangular().R
    n = B.n
    rng = np.random.default_rng(seed)
    X = source.sample(rng, samples, R)
    H_U, H_SU, H_US, se_US, se_SU = [], [], [], [], []
    for i in range(n):
        ut, s = encode_batch(X[:, i], float(R[i, i]), reach[i])
        hus, e_us = entropy_estimate(np.column_stack([ut, s]))
        hu, _ = entropy_estimate(ut)
        hsu, e_su = conditional_entropy_estimate(s, ut)
        H_US.append(hus)
        H_U.append(hu)
        H_SU.append(hsu)
        se_US.append(e_us)
        se_SU.append(e_su)
    A = source.A if isinstance(source, UniformSource) else float("nan")
    return RateReport(
        H_U, H_SU, H_US, [r.q for r in rows],
        n * math.log2(A) if A == A else float("nan"), -math.log2(B.det),
        float(sum(math.log2(r.q) for r in rows)), "monte-carlo", samples, se_US, se_SU,
        [r.provenance for r in reach],
    )


def fig3_basis(m: int) -> LatticeBasis:
    """``(1, 0), (1/m, sqrt(1 - 1/m^2))``: unit vectors, exact ratio ``1/m``."""
    a = Fraction(1, m)
    return LatticeBasis.from_vectors([[1, 0], [a, f"sqrt({1 - a * a})"]], name=f"fig3(m={m})")
