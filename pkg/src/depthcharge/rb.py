"""Resource-burning challenges.

An ``x``-hard challenge costs its solver ``x`` units. Two backends share the
same issue/solve/verify surface:

* :class:`LedgerBackend` realises a unit as an exact bookkeeping debit. All
  analytical bound checks run against it.
* :class:`PowBackend` realises a unit as a hash puzzle whose expected work is
  ``unit_work`` hash evaluations, so an ``x``-hard challenge is ``x``
  independent unit puzzles and costs ``x * unit_work`` evaluations on average.

Challenges are single-use: any verification attempt against a known id
consumes it, so a failed solution needs a fresh quote.
"""
from __future__ import annotations

import hashlib
import random
import struct
from collections import Counter
from typing import Callable, Hashable, NamedTuple

__all__ = [
    "Challenge",
    "Solution",
    "LedgerBackend",
    "PowBackend",
    "make_backend",
    "unit_digest",
]

HASH_SPACE = 1 << 64
_NONCE = struct.Struct("<Q").pack


class Challenge(NamedTuple):
    challenge_id: int
    hardness: int
    binding: Hashable
    nonce_salt: bytes
    issued_at: float


class Solution(NamedTuple):
    challenge_id: int
    proofs: tuple[int, ...] = ()


class _ChallengeStore:
    """Outstanding-challenge registry shared by both backends."""

    kind = "abstract"

    def __init__(
        self,
        seed: int | None = None,
        ttl: float | None = None,
        clock: Callable[[], float] | None = None,
    ):
        self._rng = random.Random(seed)
        self._outstanding: dict[int, Challenge] = {}
        self._ttl = ttl
        self._tick = 0
        self._clock = clock
        # hardness units paid per principal
        self.spent: Counter = Counter()
        self.issued = 0
        self.accepted = 0
        self.rejected = 0

    def _now(self) -> float:
        if self._clock is not None:
            return self._clock()
        self._tick += 1
        return self._tick

    def issue(self, hardness: int, binding: Hashable) -> Challenge:
        if hardness < 1:
            raise ValueError(f"hardness must be >= 1, got {hardness}")
        rng = self._rng
        cid = rng.getrandbits(128)
        while cid in self._outstanding:
            cid = rng.getrandbits(128)
        ch = Challenge(cid, hardness, binding, rng.getrandbits(128).to_bytes(16, "big"), self._now())
        self._outstanding[cid] = ch
        self.issued += 1
        return ch

    def outstanding(self, challenge_id: int) -> Challenge | None:
        return self._outstanding.get(challenge_id)

    def verify(self, solution: Solution | None, binding: Hashable = None) -> Challenge | None:
        """Check and consume; returns the challenge on acceptance, else None.

        When ``binding`` is given it must equal the binding the challenge was
        issued for.
        """
        if solution is None:
            self.rejected += 1
            return None
        ch = self._outstanding.pop(solution.challenge_id, None)
        if ch is None:
            self.rejected += 1
            return None
        ok = (binding is None or ch.binding == binding) and not self._expired(ch)
        if ok:
            ok = self._check_proofs(ch, solution.proofs)
        if ok:
            self.accepted += 1
            return ch
        self.rejected += 1
        return None

    def _expired(self, ch: Challenge) -> bool:
        return self._ttl is not None and self._now() - ch.issued_at > self._ttl

    def _check_proofs(self, ch: Challenge, proofs: tuple[int, ...]) -> bool:
        raise NotImplementedError

    def accepts(self, solution: Solution) -> bool:
        return self.verify(solution) is not None


class LedgerBackend(_ChallengeStore):
    """Exact accounting: solving debits ``hardness`` units, proofs are empty."""

    kind = "ledger"

    def solve(self, challenge: Challenge, principal: Hashable) -> Solution:
        self.spent[principal] += challenge.hardness
        return Solution(challenge.challenge_id)

    def _check_proofs(self, ch: Challenge, proofs: tuple[int, ...]) -> bool:
        return not proofs


def unit_digest(nonce_salt: bytes, challenge_id: int, unit: int):
    """Hash state keyed to one unit puzzle; extend with a nonce to evaluate."""
    h = hashlib.sha256(nonce_salt)
    h.update(challenge_id.to_bytes(16, "big"))
    h.update(unit.to_bytes(4, "big"))
    return h


def threshold_bytes(unit_work: int) -> bytes:
    # a digest prefix below this (big-endian) wins with probability 1/unit_work
    return (HASH_SPACE // unit_work).to_bytes(8, "big")


class PowBackend(_ChallengeStore):
    """Proof-of-work challenges built from ``hardness`` unit puzzles.

    A witness for unit ``u`` is a nonce such that the first 8 bytes of
    ``sha256(salt || challenge_id || u || nonce)`` read big-endian fall below
    ``2**64 / unit_work``. Solvers record every evaluation in ``work``.
    """

    kind = "pow"

    def __init__(self, unit_work: int = 256, seed: int | None = None, **kw):
        super().__init__(seed=seed, **kw)
        if unit_work < 1:
            raise ValueError("unit_work must be >= 1")
        self.unit_work = unit_work
        self._threshold = threshold_bytes(unit_work)
        self.work: Counter = Counter()
        self.verify_evaluations = 0

    @property
    def unit_probability(self) -> float:
        return (HASH_SPACE // self.unit_work) / HASH_SPACE

    def solve(self, challenge: Challenge, principal: Hashable) -> Solution:
        proofs, evals = solve_units(challenge.nonce_salt, challenge.challenge_id, challenge.hardness, self._threshold)
        self.work[principal] += evals
        self.spent[principal] += challenge.hardness
        return Solution(challenge.challenge_id, proofs)

    def _check_proofs(self, ch: Challenge, proofs: tuple[int, ...]) -> bool:
        if len(proofs) != ch.hardness:
            return False
        thr = self._threshold
        for unit, nonce in enumerate(proofs, start=1):
            self.verify_evaluations += 1
            if nonce < 0 or nonce >= 1 << 64:
                return False
            h = unit_digest(ch.nonce_salt, ch.challenge_id, unit)
            h.update(_NONCE(nonce))
            if h.digest()[:8] >= thr:
                return False
        return True


def solve_units(nonce_salt: bytes, challenge_id: int, hardness: int, threshold: bytes) -> tuple[tuple[int, ...], int]:
    """Brute-force one witness per unit; returns (witnesses, evaluations)."""
    proofs = []
    evals = 0
    pack = _NONCE
    for unit in range(1, hardness + 1):
        copy = unit_digest(nonce_salt, challenge_id, unit).copy
        nonce = 0
        while True:
            h = copy()
            h.update(pack(nonce))
            # a full digest sorts below the 8-byte threshold iff its prefix does
            if h.digest() < threshold:
                break
            nonce += 1
        evals += nonce + 1
        proofs.append(nonce)
    return tuple(proofs), evals


def make_backend(kind: str = "ledger", *, seed: int | None = None, unit_work: int = 256, **kw) -> _ChallengeStore:
    if kind == "ledger":
        return LedgerBackend(seed=seed, **kw)
    if kind == "pow":
        return PowBackend(unit_work=unit_work, seed=seed, **kw)
    raise ValueError(f"unknown rb backend {kind!r}")
