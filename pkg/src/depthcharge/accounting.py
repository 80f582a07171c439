"""Cost ledgers, population statistics, the wallet oracle, and bound checks.

The ledger keeps the quantities the analysis is stated in: the clients' and
the adversary's RB spend (``B`` and per-index ``B_i``), latency, and request
counts ``I``, ``Q``, ``D``. :class:`GoodObjectStats` tracks how many good
objects each index holds (``l_i``, ``l_M``, ``l_ave``).

:class:`WalletOracle` is a test harness: it gives every good object a wallet,
makes the deposits prescribed by the accounting-method argument, and asserts
after every request that each wallet still covers its object's depth.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .table import RequestOutcome, Status

GOOD = "client"
BAD = "adversary"

# Explicit constant for the worst-case total (see global_bound).
GLOBAL_C = 3 * math.sqrt(2)


@dataclass
class CostLedger:
    algorithm_rb: int = 0
    algorithm_latency: int = 0
    adversary_rb: int = 0
    adversary_latency: int = 0
    # requests for existing objects plus inserts: the I + Q + D population
    algorithm_rb_existing: int = 0
    algorithm_latency_existing: int = 0
    good_inserts: int = 0
    good_queries: int = 0
    good_deletes: int = 0
    good_not_found: int = 0
    bad_inserts: int = 0
    bad_queries: int = 0
    bad_deletes: int = 0
    bad_not_found: int = 0
    free_probes: int = 0
    max_good_insert_rb: int = 0
    max_good_lookup_rb: int = 0
    per_index_adversary_rb: defaultdict = field(default_factory=lambda: defaultdict(int))
    per_index_good_insert_rb: defaultdict = field(default_factory=lambda: defaultdict(int))
    per_index_good_lookup_rb: defaultdict = field(default_factory=lambda: defaultdict(int))
    per_index_good_lookup_latency: defaultdict = field(default_factory=lambda: defaultdict(int))
    per_index_good_queries: defaultdict = field(default_factory=lambda: defaultdict(int))
    per_index_good_deletes: defaultdict = field(default_factory=lambda: defaultdict(int))
    per_index_good_inserts: defaultdict = field(default_factory=lambda: defaultdict(int))
    per_index_bad_deletes: defaultdict = field(default_factory=lambda: defaultdict(int))

    @property
    def settled(self) -> int:
        return (
            self.good_inserts + self.good_queries + self.good_deletes + self.good_not_found
            + self.bad_inserts + self.bad_queries + self.bad_deletes + self.bad_not_found
        )

    def record(self, outcome: RequestOutcome, principal: str, index: int | None = None) -> "CostLedger":
        i = outcome.index if index is None else index
        rb = outcome.rb_charged
        kind = outcome.kind
        if rb == 0 and kind is Status.NOT_FOUND:
            self.free_probes += 1
        if principal == BAD:
            self.adversary_rb += rb
            self.adversary_latency += outcome.latency
            self.per_index_adversary_rb[i] += rb
            if kind is Status.INSERTED:
                self.bad_inserts += 1
            elif kind is Status.FOUND:
                self.bad_queries += 1
            elif kind is Status.DELETED:
                self.bad_deletes += 1
                self.per_index_bad_deletes[i] += 1
            else:
                self.bad_not_found += 1
            return self
        if principal != GOOD:
            raise ValueError(f"unknown principal {principal!r}")
        self.algorithm_rb += rb
        self.algorithm_latency += outcome.latency
        if kind is Status.NOT_FOUND:
            self.good_not_found += 1
            return self
        self.algorithm_rb_existing += rb
        self.algorithm_latency_existing += outcome.latency
        if kind is Status.INSERTED:
            self.good_inserts += 1
            self.per_index_good_inserts[i] += 1
            self.per_index_good_insert_rb[i] += rb
            self.max_good_insert_rb = max(self.max_good_insert_rb, rb)
            return self
        self.per_index_good_lookup_rb[i] += rb
        self.per_index_good_lookup_latency[i] += outcome.latency
        self.max_good_lookup_rb = max(self.max_good_lookup_rb, rb)
        if kind is Status.FOUND:
            self.good_queries += 1
            self.per_index_good_queries[i] += 1
        else:
            self.good_deletes += 1
            self.per_index_good_deletes[i] += 1
        return self


class GoodObjectStats:
    """Live object counts per index, good and bad.

    ``l_i`` is the running maximum of live good objects at index ``i``; bounds
    use this pessimistic reading. ``cumulative`` counts every good insert ever
    made at an index, which only differs from ``l_i`` under delete churn.
    """

    def __init__(self, index_count: int):
        self.index_count = index_count
        self.live: Counter = Counter()
        self.max_live: Counter = Counter()
        self.cumulative: Counter = Counter()
        self.bad_live: Counter = Counter()

    def good_added(self, index: int) -> None:
        self.live[index] += 1
        self.cumulative[index] += 1
        if self.live[index] > self.max_live[index]:
            self.max_live[index] = self.live[index]

    def good_removed(self, index: int) -> None:
        self.live[index] -= 1

    def bad_added(self, index: int) -> None:
        self.bad_live[index] += 1

    def bad_removed(self, index: int) -> None:
        self.bad_live[index] -= 1

    def ell(self, index: int) -> int:
        return self.max_live[index]

    @property
    def ell_max(self) -> int:
        return max(self.max_live.values(), default=0)

    @property
    def ell_ave(self) -> float:
        return sum(self.max_live.values()) / self.index_count

    @property
    def ell_cumulative_max(self) -> int:
        return max(self.cumulative.values(), default=0)

    def targeted(self) -> list[int]:
        """Indices currently holding at least one good and one bad object."""
        return sorted(i for i, n in self.live.items() if n > 0 and self.bad_live[i] > 0)


class WalletViolation(AssertionError):
    pass


class WalletOracle:
    """Accounting-method wallets for good objects.

    Deposits follow the round argument: a good insert at list length ``L``
    pays ``L + 1`` for itself and leaves ``L + 1`` in the new wallet; any
    query that moves an object from depth ``d`` to the head adds one dollar to
    each good object that sat above depth ``d``; a good query empties the
    queried wallet (after checking it covers the depth) and refills it with
    one dollar. Depths are read back from the table afterwards and every
    wallet in the touched bucket must cover its depth.
    """

    def __init__(self):
        self.wallet: dict[bytes, int] = {}
        self.deposited = 0
        self.paid = 0
        self.violations: list[str] = []
        self.checks = 0
        # per index: bad-query raises in the current round and closed rounds (d_r)
        self._round_raise: Counter = Counter()
        self.rounds: defaultdict = defaultdict(list)
        self.strict = True

    def _fail(self, msg: str) -> None:
        self.violations.append(msg)
        if self.strict:
            raise WalletViolation(msg)

    def seed(self, key: bytes, dollars: int) -> None:
        self.wallet[key] = dollars

    def good_insert(self, key: bytes, prior_length: int) -> None:
        fee = prior_length + 1
        self.deposited += 2 * fee
        self.paid += fee
        self.wallet[key] = fee

    def raise_depth(self, key: bytes, delta: int = 1) -> None:
        self.wallet[key] += delta
        self.deposited += delta

    def pay(self, key: bytes, depth: int) -> None:
        have = self.wallet.get(key, 0)
        if have < depth:
            self._fail(f"wallet {have} < depth {depth} at query of {key!r}")
        self.paid += depth
        self.wallet[key] = 0

    def good_query(self, key: bytes, depth: int, displaced: list[bytes]) -> None:
        self.pay(key, depth)
        self.wallet[key] += 1
        self.deposited += 1
        for g in displaced:
            self.raise_depth(g)

    def good_delete(self, key: bytes, depth: int) -> None:
        self.pay(key, depth)
        del self.wallet[key]

    def apply(self, event: tuple) -> None:
        """Apply one event tuple: ``(name, *args)`` naming a method above."""
        name, *args = event
        if name not in ("good_insert", "raise_depth", "good_query", "good_delete", "seed"):
            raise ValueError(f"unknown wallet event {name!r}")
        getattr(self, name)(*args)

    def observe(
        self,
        outcome: RequestOutcome,
        key: bytes,
        good: bool,
        pre_depths: dict[bytes, int],
        post_depths: dict[bytes, int],
    ) -> None:
        """Translate one settled request into wallet events, then check.

        ``pre_depths`` / ``post_depths`` map each good key in the touched
        bucket to its depth before and after the request.
        """
        kind = outcome.kind
        idx = outcome.index
        if kind is Status.INSERTED:
            if good:
                self.good_insert(key, outcome.rb_charged - 1)
        elif kind is Status.FOUND:
            d = outcome.depth_before
            displaced = [g for g, dep in pre_depths.items() if dep < d and g != key]
            if good:
                self.good_query(key, d, displaced)
                self.rounds[idx].append(self._round_raise.pop(idx, 0))
            else:
                if displaced:
                    self._round_raise[idx] += 1
                for g in displaced:
                    self.raise_depth(g)
        elif kind is Status.DELETED:
            if good:
                self.good_delete(key, outcome.depth_before)
                self.rounds[idx].append(self._round_raise.pop(idx, 0))
        self.check(post_depths)

    def check(self, depths: dict[bytes, int]) -> None:
        self.checks += 1
        w = self.wallet
        for g, dep in depths.items():
            if w.get(g, 0) < dep:
                self._fail(f"wallet {w.get(g, 0)} < depth {dep} for {g!r}")


# -- closed-form bounds -------------------------------------------------------


def chain_length_bound(adversary_rb: float, ell_max: float) -> float:
    return math.sqrt(2 * adversary_rb) + ell_max


def max_flood_objects(budget: int) -> int:
    """Largest ``b`` with ``b(b+1)/2 <= budget``."""
    if budget <= 0:
        return 0
    b = (math.isqrt(8 * budget + 1) - 1) // 2
    return b


def adversary_lower_bound(b: int, s: int) -> float:
    return b * b / (8 * s)


def insertion_upper_bound(s: int, b: int, ell_max: int) -> int:
    return s * ell_max * ell_max + b * ell_max


def insertion_total_bound(good_inserts: int, adversary_rb: float, ell: int) -> float:
    """``l^2 (I + sqrt(2 I B))`` with ``l`` the most good inserts at one index."""
    return ell * ell * (good_inserts + math.sqrt(2 * good_inserts * adversary_rb))


def per_list_bound(a_ins: float, ell_i: int, q_i: int, b_i: float, d_i: int = 0) -> float:
    """Total cost of good lookups in one list.

    ``d_i`` good deletes open rounds just like queries; with none this is
    ``A_ins + l_i (q_i + sqrt(2 q_i B_i))``.
    """
    return a_ins + ell_i * (q_i + math.sqrt(2 * (q_i + d_i) * b_i))


def global_bound(requests: int, adversary_rb: float, ell: int, c: float = GLOBAL_C) -> float:
    """``C (N + sqrt(N B)) l^2`` for ``N = I + Q + D``.

    ``C = 3 sqrt(2)`` collects the explicit constants: insert fees plus the
    equal down-payment (``2(L+1)`` per insert, at most ``2(l I + sqrt(2 l I B))``),
    one dollar per good-query displacement (``l Q``), and the bad-query
    deposits ``l sqrt(2 (Q + D) B)`` after Cauchy-Schwarz over lists.
    """
    return c * (requests + math.sqrt(requests * adversary_rb)) * ell * ell


@dataclass(frozen=True)
class BoundCheck:
    name: str
    bound: float
    measured: float
    applicable: bool = True
    detail: str = ""

    @property
    def satisfied(self) -> bool:
        return (not self.applicable) or self.measured <= self.bound + 1e-9


def bound_report(
    ledger: CostLedger,
    stats: GoodObjectStats,
    max_bucket_length: int = 0,
) -> dict[str, BoundCheck]:
    """Evaluate every closed-form bound against a finished run."""
    B = ledger.adversary_rb
    ell_m = stats.ell_max
    ell_cum = stats.ell_cumulative_max
    no_bad_deletes = ledger.bad_deletes == 0
    out: dict[str, BoundCheck] = {}

    cap = chain_length_bound(B, ell_m)
    out["chain_length"] = BoundCheck("chain_length", cap, max_bucket_length)
    out["single_insert"] = BoundCheck("single_insert", cap, ledger.max_good_insert_rb)
    out["single_lookup"] = BoundCheck("single_lookup", cap, ledger.max_good_lookup_rb)

    targeted = stats.targeted()
    s = len(targeted)
    b = sum(stats.bad_live[i] for i in targeted)
    out["adversary_lower"] = BoundCheck(
        "adversary_lower",
        bound=B,
        measured=adversary_lower_bound(b, s) if s else 0.0,
        applicable=s > 0,
        detail=f"b={b} s={s}; checks b^2/(8s) <= B",
    )
    ins_targeted = sum(ledger.per_index_good_insert_rb[i] for i in targeted)
    out["insertion_upper"] = BoundCheck(
        "insertion_upper",
        bound=insertion_upper_bound(s, b, ell_m),
        measured=ins_targeted,
        applicable=s > 0 and no_bad_deletes and ledger.good_deletes == 0,
        detail=f"b={b} s={s} l_M={ell_m}",
    )
    out["insertion_total"] = BoundCheck(
        "insertion_total",
        bound=insertion_total_bound(ledger.good_inserts, B, ell_cum),
        measured=sum(ledger.per_index_good_insert_rb.values()),
    )

    worst = None
    per_ok = True
    for i in sorted(set(ledger.per_index_good_queries) | set(ledger.per_index_good_deletes)):
        q = ledger.per_index_good_queries[i]
        d = ledger.per_index_good_deletes[i]
        if q + d == 0 or ledger.per_index_bad_deletes[i]:
            continue
        bound = per_list_bound(ledger.per_index_good_insert_rb[i], stats.ell(i), q, ledger.per_index_adversary_rb[i], d)
        measured = max(ledger.per_index_good_lookup_rb[i], ledger.per_index_good_lookup_latency[i])
        slack = bound - measured
        if slack < -1e-9:
            per_ok = False
        if worst is None or slack < worst[0]:
            worst = (slack, i, bound, measured)
    if worst is None:
        out["per_list"] = BoundCheck("per_list", 0.0, 0.0, applicable=False)
    else:
        _, i, bound, measured = worst
        out["per_list"] = BoundCheck("per_list", bound, measured, detail=f"tightest index {i}; all lists ok={per_ok}")

    n = ledger.good_inserts + ledger.good_queries + ledger.good_deletes
    cost = max(ledger.algorithm_rb_existing, ledger.algorithm_latency_existing)
    out["global"] = BoundCheck(
        "global",
        bound=global_bound(n, B, max(ell_cum, 1)),
        measured=cost,
        applicable=no_bad_deletes and n > 0,
        detail=f"N={n} C={GLOBAL_C:.6f} l={ell_cum}",
    )
    return out
