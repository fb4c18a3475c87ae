"""PERM admission criteria, the core-threshold relaxation rule and PERM limit schemes.

Flag syntax shared by the CLI and configuration files::

    --perm-criterion lbd:3 | size:8 | lbd+hc:3 | hybrid
    --perm-limit none | freeze:100000 | delhalf-act:100000
                 | delhalf-lbd:100000:save=size2|size3|lbd2
"""
from __future__ import annotations

import argparse
import shlex
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence, Union

from .centrality import HcConfig

LBD_GRID = range(2, 9)
SIZE_GRID = range(2, 16)


@dataclass(frozen=True)
class LbdAtMost:
    k: int

    def __post_init__(self):
        if self.k not in LBD_GRID:
            raise ValueError(f"LBD criterion k={self.k} outside {LBD_GRID.start}..{LBD_GRID.stop - 1}")

    def __str__(self):
        return f"lbd:{self.k}"


@dataclass(frozen=True)
class SizeAtMost:
    k: int

    def __post_init__(self):
        if self.k not in SIZE_GRID:
            raise ValueError(f"size criterion k={self.k} outside {SIZE_GRID.start}..{SIZE_GRID.stop - 1}")

    def __str__(self):
        return f"size:{self.k}"


@dataclass(frozen=True)
class LbdOrHc:
    k: int

    def __post_init__(self):
        if self.k not in LBD_GRID:
            raise ValueError(f"LBD criterion k={self.k} outside {LBD_GRID.start}..{LBD_GRID.stop - 1}")

    def __str__(self):
        return f"lbd+hc:{self.k}"


@dataclass(frozen=True)
class Hybrid:
    """Size<=8 when centrality is unavailable, LBD<=3 plus HC when it is."""

    def __str__(self):
        return "hybrid"


PermCriterion = Union[LbdAtMost, SizeAtMost, LbdOrHc, Hybrid]


def resolve_criterion(criterion: PermCriterion, centrality_available: bool) -> PermCriterion:
    """Fix the per-instance choice of Hybrid; LbdOrHc degrades without centrality."""
    if isinstance(criterion, Hybrid):
        return LbdOrHc(3) if centrality_available else SizeAtMost(8)
    if isinstance(criterion, LbdOrHc) and not centrality_available:
        return LbdAtMost(criterion.k)
    return criterion


def perm_criterion(size: int, lbd: int, criterion: PermCriterion,
                   hc: Optional[Callable[[], bool]] = None,
                   lbd_threshold: Optional[int] = None) -> bool:
    """Does a learned clause of this size/LBD belong in PERM?

    ``hc`` is evaluated only for LbdOrHc and only when the LBD branch fails,
    so a stateful HC admission counter sees exactly the clauses it should.
    ``lbd_threshold`` overrides k after the core threshold was relaxed.
    """
    if isinstance(criterion, SizeAtMost):
        return size <= criterion.k
    if isinstance(criterion, (LbdAtMost, LbdOrHc)):
        k = criterion.k if lbd_threshold is None else lbd_threshold
        if lbd <= k:
            return True
        if isinstance(criterion, LbdOrHc) and hc is not None:
            return bool(hc())
        return False
    raise ValueError(f"criterion {criterion} must be resolved before use")


@dataclass
class CoreThreshold:
    """LBD threshold for Core with the one-shot relaxation 3 -> 5.

    After ``check_at`` conflicts, if Core holds fewer than ``min_core``
    clauses, the threshold is raised once to ``relaxed``.
    """
    k: Optional[int]
    relaxed: int = 5
    check_at: int = 100_000
    min_core: int = 100
    enabled: bool = True
    fired: bool = False

    @classmethod
    def for_criterion(cls, criterion: PermCriterion, **kw) -> "CoreThreshold":
        if isinstance(criterion, (LbdAtMost, LbdOrHc)):
            return cls(criterion.k, enabled=criterion.k == 3, **kw)
        return cls(None, enabled=False, **kw)

    def maybe_relax(self, conflict_no: int, core_size: int) -> Optional[int]:
        if not self.enabled or self.fired or conflict_no < self.check_at:
            return None
        self.fired = True
        if core_size < self.min_core:
            self.k = self.relaxed
            return self.k
        return None


def maybe_relax_core_threshold(conflict_no: int, core_size: int,
                               state: CoreThreshold) -> Optional[int]:
    return state.maybe_relax(conflict_no, core_size)


@dataclass(frozen=True)
class SavePredicate:
    kind: str   # "size" or "lbd"
    k: int

    def __call__(self, clause) -> bool:
        if self.kind == "size":
            return len(clause.lits) <= self.k
        return clause.lbd <= self.k

    def __str__(self):
        return f"{self.kind}{self.k}"


SAVE_PREDICATES = {"size2": SavePredicate("size", 2), "size3": SavePredicate("size", 3),
                   "lbd2": SavePredicate("lbd", 2)}


@dataclass(frozen=True)
class NoLimit:
    def __str__(self):
        return "none"


@dataclass(frozen=True)
class Freeze:
    cap: int = 100_000

    def __post_init__(self):
        if self.cap <= 0:
            raise ValueError("cap must be positive")

    def __str__(self):
        return f"freeze:{self.cap}"


@dataclass(frozen=True)
class DeleteHalfActivity:
    cap: int = 100_000

    def __post_init__(self):
        if self.cap <= 0:
            raise ValueError("cap must be positive")

    def __str__(self):
        return f"delhalf-act:{self.cap}"


@dataclass(frozen=True)
class DeleteHalfLbd:
    cap: int = 100_000
    save: SavePredicate = SAVE_PREDICATES["size2"]

    def __post_init__(self):
        if self.cap <= 0:
            raise ValueError("cap must be positive")

    def __str__(self):
        return f"delhalf-lbd:{self.cap}:save={self.save}"


PermLimitScheme = Union[NoLimit, Freeze, DeleteHalfActivity, DeleteHalfLbd]

REROUTE = "reroute"


def enforce_perm_limit(core: Sequence, scheme: PermLimitScheme, *, incoming: bool = False,
                       is_locked: Callable = lambda c: False, size: Optional[int] = None):
    """Decide what the limit scheme does to Core right now.

    Returns ``REROUTE`` when an incoming PERM-eligible clause must go to Tier2
    instead, a list of clauses to delete when a delete-half fires, else None.
    ``size`` is the true |Core| when ``core`` is a pre-filtered candidate subset.
    """
    if size is None:
        size = len(core)
    if isinstance(scheme, NoLimit) or size < scheme.cap:
        return None
    if isinstance(scheme, Freeze):
        return REROUTE if incoming else None
    if incoming:
        return None
    quota = size // 2
    if isinstance(scheme, DeleteHalfActivity):
        candidates = [c for c in core if not is_locked(c)]
        candidates.sort(key=lambda c: (c.activity, -c.lbd, c.born_at))
    else:
        candidates = [c for c in core if not is_locked(c) and not scheme.save(c)]
        candidates.sort(key=lambda c: (-c.lbd, c.born_at))
    return candidates[:quota]


def shadow_admission_counts(stream: Iterable[tuple[int, int]],
                            criteria: Sequence[PermCriterion]) -> dict[str, int]:
    """Count how many (size, lbd) records of a fixed stream each criterion admits."""
    stream = list(stream)
    return {str(cr): sum(perm_criterion(s, l, cr) for s, l in stream) for cr in criteria}


class AuxMode(str, Enum):
    OFF = "off"
    TO_TEMP = "temp"
    TO_PERM = "perm"


@dataclass(frozen=True)
class AuxLearnConfig:
    mode: AuxMode = AuxMode.OFF
    max_backjump_level: int = 5

    def __post_init__(self):
        if self.max_backjump_level < 1:
            raise ValueError("max_backjump_level must be >= 1")


@dataclass
class PolicyConfig:
    criterion: PermCriterion = field(default_factory=lambda: LbdAtMost(3))
    limit: PermLimitScheme = field(default_factory=NoLimit)
    hc: HcConfig = field(default_factory=HcConfig)
    aux: AuxLearnConfig = field(default_factory=AuxLearnConfig)
    name: Optional[str] = None

    @property
    def wants_centrality(self) -> bool:
        return isinstance(self.criterion, (LbdOrHc, Hybrid))

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        parts = [str(self.criterion).replace(":", "")]
        if not isinstance(self.limit, NoLimit):
            parts.append(str(self.limit).replace(":", "-").replace("=", ""))
        if self.wants_centrality:
            parts.append(f"hcmax{self.hc.max_hc}")
            if self.hc.size_limit is not None:
                parts.append(f"hcsize{self.hc.size_limit}")
        if self.aux.mode != AuxMode.OFF:
            parts.append(f"aux{self.aux.mode.value}{self.aux.max_backjump_level}")
        return "_".join(parts)

    def to_args(self) -> str:
        args = [f"--perm-criterion {self.criterion}", f"--perm-limit {self.limit}"]
        if self.wants_centrality:
            size = "none" if self.hc.size_limit is None else self.hc.size_limit
            args += [f"--hc-max {self.hc.max_hc}", f"--hc-size-limit {size}",
                     f"--centrality-budget-ms {self.hc.budget_ms:g}"]
        else:
            args.append("--hc off")
        args += [f"--aux-learn {self.aux.mode.value}",
                 f"--aux-learn-max-b {self.aux.max_backjump_level}"]
        if self.name:
            args.append(f"--name {self.name}")
        return " ".join(args)


def parse_criterion(text: str) -> PermCriterion:
    text = text.strip().lower()
    if text == "hybrid":
        return Hybrid()
    kind, _, k = text.partition(":")
    try:
        k = int(k)
    except ValueError:
        raise ValueError(f"bad criterion {text!r}") from None
    table = {"lbd": LbdAtMost, "size": SizeAtMost, "lbd+hc": LbdOrHc}
    if kind not in table:
        raise ValueError(f"unknown criterion {kind!r}")
    return table[kind](k)


def parse_limit(text: str) -> PermLimitScheme:
    parts = text.strip().lower().split(":")
    kind = parts[0]
    if kind == "none":
        return NoLimit()
    cap = int(parts[1]) if len(parts) > 1 and parts[1] else 100_000
    if kind == "freeze":
        return Freeze(cap)
    if kind == "delhalf-act":
        return DeleteHalfActivity(cap)
    if kind == "delhalf-lbd":
        save = "size2"
        if len(parts) > 2:
            key, _, save = parts[2].partition("=")
            if key != "save":
                raise ValueError(f"bad limit option {parts[2]!r}")
        if save not in SAVE_PREDICATES:
            raise ValueError(f"unknown save predicate {save!r}")
        return DeleteHalfLbd(cap, SAVE_PREDICATES[save])
    raise ValueError(f"unknown limit scheme {kind!r}")


def add_policy_arguments(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("policy")
    g.add_argument("--perm-criterion", type=parse_criterion, default=LbdAtMost(3))
    g.add_argument("--perm-limit", type=parse_limit, default=NoLimit())
    g.add_argument("--hc", choices=["on", "off"], default=None,
                   help="on upgrades lbd:k to lbd+hc:k; off disables centrality")
    g.add_argument("--hc-max", type=int, default=10_000)
    g.add_argument("--hc-size-limit", default="none")
    g.add_argument("--centrality-budget-ms", type=float, default=150_000.0)
    g.add_argument("--aux-learn", choices=[m.value for m in AuxMode], default="off")
    g.add_argument("--aux-learn-max-b", type=int, default=5)
    g.add_argument("--name", default=None)


def policy_from_args(ns: argparse.Namespace) -> PolicyConfig:
    criterion = ns.perm_criterion
    if ns.hc == "on" and isinstance(criterion, LbdAtMost):
        criterion = LbdOrHc(criterion.k)
    elif ns.hc == "off":
        criterion = resolve_criterion(criterion, centrality_available=False)
    size_limit = None if str(ns.hc_size_limit).lower() == "none" else int(ns.hc_size_limit)
    hc = HcConfig(max_hc=ns.hc_max, size_limit=size_limit, budget_ms=ns.centrality_budget_ms)
    aux = AuxLearnConfig(AuxMode(ns.aux_learn), ns.aux_learn_max_b)
    return PolicyConfig(criterion, ns.perm_limit, hc, aux, ns.name)


def parse_policy(line: str) -> PolicyConfig:
    parser = argparse.ArgumentParser(add_help=False, exit_on_error=False)
    add_policy_arguments(parser)
    try:
        ns, extra = parser.parse_known_args(shlex.split(line))
    except argparse.ArgumentError as exc:
        raise ValueError(f"bad policy line {line!r}: {exc}") from None
    if extra:
        raise ValueError(f"bad policy line {line!r}: unexpected {' '.join(extra)}")
    return policy_from_args(ns)


def read_config_file(path) -> list[PolicyConfig]:
    configs = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                configs.append(parse_policy(line))
    return configs
