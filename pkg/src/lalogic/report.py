"""Decision reports: a verdict, an optional witness, and resource stats."""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["DecisionReport"]


@dataclass
class DecisionReport:
    """verdict is a short word ('valid', 'invalid', 'equivalent',
    'not_equivalent', 'empty', 'nonempty', 'accepted', 'rejected',
    'no_counterexample', 'counterexample'); holds says whether the queried
    property holds.  The witness, when present, is a word (tuple of letters),
    a match triple, a structure with a point, or an input tree."""

    verdict: str
    holds: bool
    witness: object = None
    witness_kind: str = ""
    stats: dict = field(default_factory=dict)
    detail: str = ""

    def merged_stats(self, **extra) -> dict:
        out = dict(self.stats)
        out.update(extra)
        return out
