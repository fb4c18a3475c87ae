"""Auxiliary backjump clause learned alongside each 1-UIP clause.

After a conflict that backjumps to level b with asserting literal m, the
decisions l_1..l_b of the surviving prefix already force m by unit
propagation, so {-l_1, ..., -l_b, m} is implied.  It is short whenever b is.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .policy import AuxLearnConfig, AuxMode


@dataclass(frozen=True)
class AuxClause:
    lits: tuple[int, ...]     # solver literal codes, asserting literal first
    lbd: int
    backjump_level: int


def derive_backjump_clause(outcome, cfg: AuxLearnConfig) -> Optional[AuxClause]:
    """Build the backjump clause from a conflict analysis outcome, if enabled.

    ``outcome`` needs ``asserting_literal``, ``backjump_level`` and
    ``decisions`` in solver literal codes (negation is ``code ^ 1``).
    """
    b = outcome.backjump_level
    if cfg.mode is AuxMode.OFF or b == 0 or b > cfg.max_backjump_level:
        return None
    decisions = outcome.decisions
    if len(decisions) != b:
        raise ValueError(f"expected {b} decision literals, got {len(decisions)}")
    # highest-level decision second so it becomes the other watch
    lits = (outcome.asserting_literal, decisions[-1] ^ 1,
            *(d ^ 1 for d in decisions[:-1]))
    return AuxClause(lits, b, b)
