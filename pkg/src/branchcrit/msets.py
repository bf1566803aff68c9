"""Integer multisets and the four cut operators."""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

from .errors import AbsentEntry


class Multiset:
    """An immutable multiset of integers, stored as a weakly increasing tuple."""

    __slots__ = ("entries", "_hash")

    def __init__(self, entries: Iterable[int] = ()):
        self.entries = tuple(sorted(int(e) for e in entries))
        self._hash = hash(self.entries)

    @classmethod
    def repeat(cls, value: int, times: int) -> "Multiset":
        return cls((value,) * times)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Multiset) and self.entries == other.entries

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Multiset") -> bool:
        return (len(self), self.entries) < (len(other), other.entries)

    def __repr__(self) -> str:
        return "Multiset(%r)" % (list(self.entries),)

    def __str__(self) -> str:
        return "⟨" + ",".join(str(e) for e in self.entries) + "⟩"

    def __or__(self, other: "Multiset") -> "Multiset":
        return Multiset(self.entries + other.entries)

    def add(self, *values: int) -> "Multiset":
        """Union with the given entries."""
        return Multiset(self.entries + tuple(values))

    def count_in(
        self,
        lo: Optional[int] = None,
        hi: Optional[int] = None,
        lo_open: bool = False,
        hi_open: bool = False,
    ) -> int:
        """Number of entries in the interval from lo to hi; None means unbounded."""
        c = 0
        for e in self.entries:
            if lo is not None and (e < lo or (lo_open and e == lo)):
                continue
            if hi is not None and (e > hi or (hi_open and e == hi)):
                continue
            c += 1
        return c

    def count(self, x: int) -> int:
        return self.entries.count(x)

    def le(self, t: int) -> int:
        """Entries at most t."""
        return sum(1 for e in self.entries if e <= t)

    def lt(self, t: int) -> int:
        return sum(1 for e in self.entries if e < t)

    def ge(self, t: int) -> int:
        return sum(1 for e in self.entries if e >= t)

    def replace_one(self, x: int, y: int) -> "Multiset":
        if x not in self.entries:
            raise AbsentEntry("%d does not occur in %s" % (x, self))
        k = self.entries.index(x)
        return Multiset(self.entries[:k] + (y,) + self.entries[k + 1:])

    def cut_L(self, m: int) -> "Multiset":
        """Lower cut with clamping: every entry j becomes min(j, m-1)."""
        return Multiset(min(e, m - 1) for e in self.entries)

    def cut_R(self, m: int) -> "Multiset":
        """Keeps the entries that are at least m-1."""
        return Multiset(e for e in self.entries if e >= m - 1)

    def cut_Lup(self, m: int) -> "Multiset":
        """Keeps the entries that are at most m-1."""
        return Multiset(e for e in self.entries if e <= m - 1)

    def cut_Rup(self, m: int) -> "Multiset":
        """Upper cut with clamping: every entry i becomes max(i, m-1)."""
        return Multiset(max(e, m - 1) for e in self.entries)

    def within(self, lo: int, hi: int) -> bool:
        """True if every entry lies in the half-open range [lo, hi)."""
        return all(lo <= e < hi for e in self.entries)


def count_in(I: Multiset, lo=None, hi=None, lo_open=False, hi_open=False) -> int:
    return I.count_in(lo, hi, lo_open, hi_open)


def replace_one(I: Multiset, x: int, y: int) -> Multiset:
    return I.replace_one(x, y)


def cut_L(J: Multiset, m: int) -> Multiset:
    return J.cut_L(m)


def cut_R(J: Multiset, m: int) -> Multiset:
    return J.cut_R(m)


def cut_Lup(I: Multiset, m: int) -> Multiset:
    return I.cut_Lup(m)


def cut_Rup(I: Multiset, m: int) -> Multiset:
    return I.cut_Rup(m)


def parse_multiset(text: str) -> Multiset:
    """Parse "a,b,c" (angle brackets optional) into a multiset."""
    text = text.strip().strip("⟨⟩<>").strip()
    if not text:
        return Multiset()
    return Multiset(int(tok) for tok in text.split(","))
