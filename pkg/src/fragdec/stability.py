"""Power-set dynamics of the letter images: T_k = η(A^k), the stability
index, stable semigroup and stable monoid."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .semigroup import SyntacticPresentation, product_set


@dataclass(frozen=True, eq=False)
class StabilityRecord:
    parent: SyntacticPresentation
    s: int
    index: int
    period: int
    trace: tuple[frozenset[int], ...]
    stable_semigroup: frozenset[int]
    stable_monoid: frozenset[int]

    def T(self, k: int) -> frozenset[int]:
        """η(A^k) for any k >= 1, using the eventual periodicity."""
        if k < 1:
            raise ValueError("k must be positive")
        if k > len(self.trace):
            k = self.index + (k - self.index) % self.period
        return self.trace[k - 1]


def stability_index(m: SyntacticPresentation) -> StabilityRecord:
    """Iterate T_{k+1} = T_k·T_1 until a set repeats.

    With pre-period ``index`` and ``period`` p, T_k = T_{2k} exactly when
    k >= index and p divides k, so s is the least multiple of p that is at
    least ``index``.
    """
    letters = frozenset(m.letter_image.values())
    if not letters:
        raise ValueError("stability needs at least one letter")
    seen = {letters: 1}
    trace = [letters]
    while True:
        nxt = product_set(m, trace[-1], letters)
        if nxt in seen:
            index = seen[nxt]
            period = len(trace) + 1 - index
            break
        seen[nxt] = len(trace) + 1
        trace.append(nxt)
    s = period * max(1, -(-index // period))
    k = len(trace)
    while k < 2 * s:
        trace.append(product_set(m, trace[-1], letters))
        k += 1
    stable = trace[s - 1]
    monoid = stable | ({m.identity} if m.identity is not None else set())
    return StabilityRecord(m, s, index, period, tuple(trace), stable, frozenset(monoid))


def stable_parts(r: StabilityRecord) -> tuple[frozenset[int], frozenset[int]]:
    return r.stable_semigroup, r.stable_monoid


def length_residue_images(m: SyntacticPresentation, d: int) -> dict[int, frozenset[int]]:
    """R_r = {η(u) : |u| ≡ r mod d}, by reachability in M x Z_d from (1, 0)."""
    if d < 1:
        raise ValueError("modulus must be positive")
    if m.identity is None:
        raise ValueError("length residues need a monoid (identity for the empty word)")
    t = m.table
    gens = sorted(set(m.letter_image.values()))
    start = (m.identity, 0)
    seen = {start}
    queue = deque([start])
    while queue:
        x, k = queue.popleft()
        for g in gens:
            nxt = (t[x][g], (k + 1) % d)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    out: dict[int, set[int]] = {r: set() for r in range(d)}
    for x, k in seen:
        out[k].add(x)
    return {r: frozenset(v) for r, v in out.items()}
