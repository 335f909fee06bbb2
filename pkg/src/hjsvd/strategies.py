"""Pivot strategies and their equivalence relations.

The solver's parallel schedule is the modified modulus strategy: a
quasi-cyclic strategy started from the antidiagonal that annihilates the
pairs (i, q+i) twice per quasi-sweep.  The remaining machinery implements
the classical orderings (row-cyclic, antidiagonal, classic modulus) and
decides trace/shift/weak equivalence between them, so the stepper can be
cross-checked constructively.
"""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ShapeError


@dataclass
class StepperState:
    """Per-block stepper quadruples of the modified modulus strategy.

    ip/jp are the auxiliary counters, iblk/jblk the current pivot pair of
    each block; r is the (even) column count, giving b = r/2 blocks.
    """

    r: int
    ip: np.ndarray
    jp: np.ndarray
    iblk: np.ndarray
    jblk: np.ndarray

    def pairs(self):
        """Current pivot pairs (i, j) with i < j, one per block."""
        lo = np.minimum(self.iblk, self.jblk)
        hi = np.maximum(self.iblk, self.jblk)
        return [(int(i), int(j)) for i, j in zip(lo, hi)]


def stepper_init(r):
    """Antidiagonal start: block k holds the pair (k, r-k-1)."""
    if r < 2 or r % 2 != 0:
        raise ShapeError("r must be even and >= 2")
    b = r // 2
    k = np.arange(b, dtype=np.int64)
    return StepperState(r, k.copy(), r - k - 1, k.copy(), r - k - 1)


def stepper_advance(state, k):
    """Advance block k to its next pivot pair (in place); returns state.

    The branch condition is ip + jp >= r - 1 (see the enumeration tests
    guarding this reading).
    """
    r = state.r
    if state.ip[k] + state.jp[k] >= r - 1:
        state.ip[k] += 1
        if state.ip[k] == state.jp[k]:
            state.ip[k] -= r // 2
            state.jp[k] = state.ip[k]
        state.iblk[k] = state.ip[k]
    else:
        state.jp[k] += 1
        state.jblk[k] = state.jp[k]
    return state


def stepper_advance_all(state):
    """Advance every block by one step (compiled, in place)."""
    _kernels.advance_stepper(state.ip, state.jp, state.iblk, state.jblk, state.r)
    return state


@dataclass(frozen=True)
class PivotOrdering:
    """A sequence of steps, each a set of pairwise disjoint index pairs.

    Pairs are zero-based with i < j.  The linearization concatenates the
    steps, pairs within a step in ascending order.
    """

    n: int
    steps: tuple

    def __post_init__(self):
        norm = []
        for step in self.steps:
            pairs = tuple(sorted((min(i, j), max(i, j)) for i, j in step))
            used = [x for p in pairs for x in p]
            if len(set(used)) != len(used):
                raise ValueError(f"step {pairs} has overlapping pairs")
            for i, j in pairs:
                if not 0 <= i < j < self.n:
                    raise ValueError(f"pair ({i}, {j}) out of range for n={self.n}")
            norm.append(pairs)
        object.__setattr__(self, "steps", tuple(norm))

    @property
    def linearization(self):
        return tuple(p for step in self.steps for p in step)

    def pair_counts(self):
        return Counter(self.linearization)

    def is_cyclic(self):
        """Every pair of distinct indices appears exactly once."""
        counts = self.pair_counts()
        np_ = self.n * (self.n - 1) // 2
        return len(counts) == np_ and all(v == 1 for v in counts.values())

    def to_csv(self, path):
        """Write 'step,i,j' lines for external inspection."""
        with open(path, "w") as fh:
            fh.write("step,i,j\n")
            for s, step in enumerate(self.steps):
                for i, j in step:
                    fh.write(f"{s},{i},{j}\n")

    @classmethod
    def from_csv(cls, path, n):
        rows = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
        nsteps = int(rows[:, 0].max()) + 1 if rows.size else 0
        steps = [[] for _ in range(nsteps)]
        for s, i, j in rows:
            steps[s].append((int(i), int(j)))
        return cls(n, tuple(tuple(s) for s in steps))


def enumerate_modified_modulus(r, sweeps=1):
    """Quasi-sweeps of the modified modulus stepper, r steps per sweep.

    The stepper state persists across quasi-sweeps (no reset), matching the
    solver's schedule.
    """
    state = stepper_init(r)
    steps = []
    for _ in range(sweeps * r):
        steps.append(state.pairs())
        stepper_advance_all(state)
    return PivotOrdering(r, tuple(tuple(s) for s in steps))


def enumerate_row_cyclic(n):
    """(0,1),(0,2),...,(n-2,n-1), one pair per step."""
    if n < 2:
        raise ShapeError("n must be >= 2")
    steps = tuple(((i, j),) for i in range(n - 1) for j in range(i + 1, n))
    return PivotOrdering(n, steps)


def enumerate_antidiagonal(n):
    """Antidiagonal sweeps: step s holds all pairs i < j with i + j == s.

    2n - 3 steps; zero-based pair sums run from 1 to 2n - 3.
    """
    if n < 2:
        raise ShapeError("n must be >= 2")
    steps = []
    for s in range(1, 2 * n - 2):
        step = tuple((i, s - i) for i in range(max(0, s - n + 1), (s + 1) // 2))
        steps.append(step)
    return PivotOrdering(n, tuple(steps))


def enumerate_classic_modulus(n):
    """Classic modulus strategy (no doubled pairs).

    Constructed independently of the stepper, as the antidiagonal steps
    reordered by O' = (n-1, n, n+1, 1, n+2, 2, ..., 2n-3, n-2) in 1-based
    step numbers.
    """
    if n < 2:
        raise ShapeError("n must be >= 2")
    anti = enumerate_antidiagonal(n).steps
    total = 2 * n - 3
    if n == 2:
        order = [1]
    elif n == 3:
        order = [2, 3, 1]
    else:
        order = [n - 1, n]
        for k in range(1, n - 2):
            order.append(n + k)
            order.append(k)
        assert order[-1] == n - 3 and order[-2] == total
        order.append(n - 2)
    return PivotOrdering(n, tuple(anti[s - 1] for s in order))


def _check_cyclic(o, name):
    if not o.is_cyclic():
        raise ValueError(f"{name} is not cyclic (each pair exactly once)")


def trace_equivalent(o1, o2):
    """Decide equivalence under admissible transpositions.

    Two cyclic orderings are equivalent iff they hold the same pairs and,
    for every two pairs sharing an index, the pairs occur in the same
    relative order in both linearizations.
    """
    _check_cyclic(o1, "o1")
    _check_cyclic(o2, "o2")
    if o1.n != o2.n:
        return False
    lin1 = o1.linearization
    lin2 = o2.linearization
    if set(lin1) != set(lin2):
        return False
    pos2 = {p: k for k, p in enumerate(lin2)}
    by_index = [[] for _ in range(o1.n)]
    for k, (i, j) in enumerate(lin1):
        by_index[i].append(k)
        by_index[j].append(k)
    for v in range(o1.n):
        seq = [pos2[lin1[k]] for k in by_index[v]]
        if any(a > b for a, b in zip(seq, seq[1:])):
            return False
    return True


def shift_ordering(o, c):
    """Cyclic shift: the pair at position I moves to (I + c) mod n_p.

    The result is returned with singleton steps; only the linearization is
    meaningful for equivalence checks.
    """
    _check_cyclic(o, "o")
    lin = o.linearization
    np_ = len(lin)
    c %= np_
    shifted = [None] * np_
    for idx, pair in enumerate(lin):
        shifted[(idx + c) % np_] = pair
    return PivotOrdering(o.n, tuple((p,) for p in shifted))


@dataclass
class EquivalenceWitness:
    """Outcome of the weak-equivalence decision with its witness chain."""

    equivalent: bool
    rowcyclic_eq_antidiagonal: bool = False
    shift: int = -1
    details: str = ""


def weakly_equivalent_modulus_rowcyclic(n):
    """Weak equivalence of the classic modulus and row-cyclic strategies.

    Witness chain: row-cyclic ~ antidiagonal by trace equivalence, then a
    cyclic shift c with shift(antidiagonal, c) ~ classic modulus.  The shift
    is searched exhaustively over 0..n_p-1.
    """
    if n < 4:
        raise ShapeError("n must be >= 4")
    anti = enumerate_antidiagonal(n)
    rc = enumerate_row_cyclic(n)
    cm = enumerate_classic_modulus(n)
    step1 = trace_equivalent(rc, anti)

    # Fast shift search: precompute, per matrix index v, the antidiagonal
    # positions of v's pairs in classic-modulus order; a shift c works iff
    # every such sequence is increasing modulo-shifted.
    lin_a = anti.linearization
    lin_m = cm.linearization
    np_ = len(lin_a)
    pos_a = {p: k for k, p in enumerate(lin_a)}
    rows = []
    for v in range(n):
        mine = [pos_a[p] for p in lin_m if v in p]
        rows.append(mine)
    P = np.array(rows, dtype=np.int64)  # (n, n-1), antidiagonal positions
    found = -1
    for c in range(np_):
        B = (P + c) % np_
        if np.all(np.diff(B, axis=1) > 0):
            found = c
            break
    ok = False
    if found >= 0:
        ok = trace_equivalent(shift_ordering(anti, found), cm)
    equivalent = step1 and ok
    details = "" if equivalent else (
        f"row-cyclic~antidiagonal={step1}, shift found={found}, verified={ok}"
    )
    return EquivalenceWitness(equivalent, step1, found, details)


@dataclass
class CoverageReport:
    """Result of checking one modified-modulus quasi-sweep."""

    ok: bool
    r: int
    q: int
    doubles: set = field(default_factory=set)
    failures: list = field(default_factory=list)
    total_annihilations: int = 0


def validate_coverage(o, q):
    """Check the doubled-diagonal coverage of one quasi-sweep.

    Every pair at least once, pairs (i, q+i) exactly twice, all others
    exactly once, total r*q annihilations, every step internally disjoint
    (the last is enforced by PivotOrdering itself).
    """
    r = 2 * q
    failures = []
    if o.n != r:
        failures.append(f"ordering is over n={o.n}, expected r={r}")
    if len(o.steps) != r:
        failures.append(f"{len(o.steps)} steps, expected {r}")
    counts = o.pair_counts()
    doubles = {(i, q + i) for i in range(q)}
    for i in range(r - 1):
        for j in range(i + 1, r):
            expect = 2 if (i, j) in doubles else 1
            got = counts.get((i, j), 0)
            if got != expect:
                step_hits = [s for s, st in enumerate(o.steps) if (i, j) in st]
                failures.append(
                    f"pair ({i}, {j}) annihilated {got} times, expected "
                    f"{expect} (steps {step_hits})"
                )
    total = sum(counts.values())
    if total != r * q:
        failures.append(f"{total} annihilations, expected {r * q}")
    return CoverageReport(not failures, r, q, doubles, failures, total)
