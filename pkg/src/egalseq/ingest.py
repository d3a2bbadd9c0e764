"""Ranked preference files plus candidate labels to multilevel elections.

Input is the PrefLib text format for strict (possibly incomplete) orders::

    # NUMBER ALTERNATIVES: 3
    # ALTERNATIVE NAME 1: x
    # ALTERNATIVE NAME 2: y
    # ALTERNATIVE NAME 3: z
    2: 1,3,2
    1: 3

and a JSON sidecar mapping candidate names to the level labels they belong to.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .model import Election, InvalidElection, Level

APPROVAL1 = "APPROVAL1"
APPROVAL2 = "APPROVAL2"
POINT = "POINT"
CLASSES = (APPROVAL1, APPROVAL2, POINT)

POINTS = 10
MAX_APPROVAL_CANDIDATES = 160
MAX_POINT_AGENTS = 80
MAX_POINT_CANDIDATES = 80


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class RankedProfile:
    candidates: tuple[str, ...]  # names, candidate id i is candidates[i - 1]
    orders: tuple[tuple[int, ...], ...]  # one per agent, most preferred first

    @property
    def m(self) -> int:
        return len(self.candidates)

    @property
    def n(self) -> int:
        return len(self.orders)


@dataclass(frozen=True)
class Rejected:
    reason: str

    def __bool__(self):
        return False


_NAME = re.compile(r"#\s*ALTERNATIVE NAME\s+(\d+)\s*:\s?(.*)$")
_COUNT = re.compile(r"#\s*NUMBER ALTERNATIVES\s*:\s*(\d+)\s*$")
_BODY = re.compile(r"^(\d+)\s*:\s*(.*)$")


def parse_ranked_text(text: str) -> RankedProfile:
    names: dict[int, str] = {}
    declared = None
    raw_orders: list[tuple[int, list[int], int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if m := _NAME.match(line):
                names[int(m.group(1))] = m.group(2).strip()
            elif m := _COUNT.match(line):
                declared = int(m.group(1))
            continue
        m = _BODY.match(line)
        if not m:
            raise ProfileError(f"line {lineno}: expected 'count: id,id,...', got {line!r}")
        count = int(m.group(1))
        body = m.group(2).strip()
        if not body:
            raise ProfileError(f"line {lineno}: empty order")
        ids = []
        for part in body.split(","):
            part = part.strip()
            if not part.isdigit():
                raise ProfileError(f"line {lineno}: bad candidate id {part!r}")
            ids.append(int(part))
        if len(set(ids)) != len(ids):
            raise ProfileError(f"line {lineno}: candidate listed twice in one order")
        raw_orders.append((count, ids, lineno))

    m_o = declared if declared is not None else max(names, default=0)
    if m_o == 0:
        m_o = max((max(ids) for _, ids, _ in raw_orders), default=0)
    for i in names:
        if not 1 <= i <= m_o:
            raise ProfileError(f"alternative {i} outside 1..{m_o}")
    orders = []
    for count, ids, lineno in raw_orders:
        bad = [i for i in ids if not 1 <= i <= m_o]
        if bad:
            raise ProfileError(f"line {lineno}: unknown candidate id {bad[0]}")
        orders.extend([tuple(ids)] * count)
    if not orders:
        raise ProfileError("profile has no votes")
    cands = tuple(names.get(i, str(i)) for i in range(1, m_o + 1))
    return RankedProfile(cands, tuple(orders))


def parse_ranked(path: str | Path) -> RankedProfile:
    return parse_ranked_text(Path(path).read_text(encoding="utf-8"))


def load_labels(path: str | Path) -> dict[str, list[str]]:
    """Read a label sidecar: ``{"candidate name": ["level", ...], ...}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ProfileError("label file must map candidate names to level lists")
    out = {}
    for cand, levels in data.items():
        if isinstance(levels, str):
            levels = [levels]
        if not levels or not all(isinstance(x, str) for x in levels):
            raise ProfileError(f"candidate {cand!r} needs a nonempty list of level names")
        out[str(cand)] = list(levels)
    return out


def round_half_up(num: int, den: int) -> int:
    q, r = divmod(num, den)
    return q + 1 if 2 * r >= den else q


def point_split(b1: int, b2: int) -> tuple[int, int]:
    u1 = round_half_up(POINTS * b1, b1 + b2)
    return u1, POINTS - u1


def _resolve(profile: RankedProfile, labels) -> list[tuple[str, list[int]]]:
    """Levels in order of first mention, each with its candidate ids in file order."""
    by_name = {name: i for i, name in enumerate(profile.candidates, 1)}
    level_order: list[str] = []
    members: dict[str, set[int]] = {}
    for cand, levs in labels.items():
        cid = by_name.get(cand)
        if cid is None and cand.isdigit() and 1 <= int(cand) <= profile.m:
            cid = int(cand)
        if cid is None:
            raise ProfileError(f"label refers to unknown candidate {cand!r}")
        for lev in levs:
            if lev not in members:
                level_order.append(lev)
                members[lev] = set()
            members[lev].add(cid)
    return [(lev, sorted(members[lev])) for lev in level_order]


def _level_utilities(klass, order, level_ids, m_o):
    members = set(level_ids)
    present = [c for c in order if c in members]
    util = dict.fromkeys(level_ids, 0)
    if klass == APPROVAL1:
        for c in present[:1]:
            util[c] = 1
    elif klass == APPROVAL2:
        for c in present[:2]:
            util[c] = 1
    elif len(present) == 1:
        util[present[0]] = POINTS
    elif len(present) >= 2:
        c1, c2 = present[:2]
        pos = {c: p for p, c in enumerate(order)}
        util[c1], util[c2] = point_split(m_o - pos[c1], m_o - pos[c2])
    return [util[c] for c in level_ids]


def build_election(profile: RankedProfile, labels, klass: str) -> Election:
    """One level per label; every level starts with k = 1 until a kappa rule is applied."""
    klass = klass.upper()
    if klass not in CLASSES:
        raise ValueError(f"unknown instance class {klass!r}")
    resolved = _resolve(profile, labels)
    if not resolved:
        raise ProfileError("label map assigns no candidate to any level")
    unique = len(set(profile.candidates)) == profile.m
    name = (lambda i: profile.candidates[i - 1]) if unique else (lambda i: f"c{i}")
    agents = tuple(f"a{i + 1}" for i in range(profile.n))
    levels = []
    for _, ids in resolved:
        rows = tuple(tuple(_level_utilities(klass, o, ids, profile.m)) for o in profile.orders)
        levels.append(Level(tuple(name(i) for i in ids), 1, rows))
    meta = {"class": klass, "levels": [lev for lev, _ in resolved], "kappa_rule": None}
    return Election(agents, tuple(levels), meta)


def _cleanup_levels(e: Election):
    """Drop unsupported candidates, then levels where every agent has the same utility row."""
    notes = []
    levels, names = [], []
    level_names = e.meta.get("levels") or [str(t) for t in range(e.tau)]
    for lev, lname in zip(e.levels, level_names):
        cols = lev.column_sums()
        keep = [j for j, s in enumerate(cols) if s > 0]
        if not keep:
            continue
        rows = tuple(tuple(row[j] for j in keep) for row in lev.utility)
        if all(r == rows[0] for r in rows):
            continue
        k = lev.k
        if k > len(keep):
            notes.append(f"k clamped on level {lname}: {k} -> {len(keep)}")
            k = len(keep)
        levels.append(Level(tuple(lev.candidates[j] for j in keep), k, rows))
        names.append(lname)
    return levels, names, notes


def cleanup(e: Election, klass: str | None = None) -> Election | Rejected:
    klass = (klass or e.meta.get("class") or "").upper()
    levels, names, notes = _cleanup_levels(e)
    if len(levels) <= 1:
        return Rejected(f"{len(levels)} level(s) left after cleanup")
    out = Election(e.agents, tuple(levels), dict(e.meta))
    out.meta["levels"] = names
    if notes:
        out.meta["notes"] = list(e.meta.get("notes", [])) + notes
    if out.m <= 3:
        return Rejected(f"only {out.m} candidates left after cleanup")
    if klass == POINT:
        if out.n > MAX_POINT_AGENTS or out.m > MAX_POINT_CANDIDATES:
            return Rejected(f"point instance too large (n={out.n}, m={out.m})")
    elif out.m > MAX_APPROVAL_CANDIDATES:
        return Rejected(f"{out.m} candidates exceed {MAX_APPROVAL_CANDIDATES}")
    return out


def kappa_sizes(e: Election, l: int) -> tuple[int, ...]:
    if l < 1:
        raise ValueError("kappa parameter must be a positive integer")
    return tuple(max(min(l, len(lev.candidates) - 1), 1) for lev in e.levels)


def kappa_rule(e: Election, l: int) -> Election:
    out = e.with_kappa(kappa_sizes(e, l))
    meta = dict(e.meta)
    meta["kappa_rule"] = l
    return Election(out.agents, out.levels, meta)


def ingest(profile_path, labels_path, klass: str, l: int | None = 2) -> Election | Rejected:
    """Full pipeline: parse, build, clean up, then apply the kappa rule."""
    profile = parse_ranked(profile_path)
    e = build_election(profile, load_labels(labels_path), klass)
    e.meta["source"] = Path(profile_path).name
    cleaned = cleanup(e, klass)
    if isinstance(cleaned, Rejected) or l is None:
        return cleaned
    return kappa_rule(cleaned, l)


__all__ = [
    "APPROVAL1", "APPROVAL2", "POINT", "CLASSES", "ProfileError", "RankedProfile", "Rejected",
    "parse_ranked", "parse_ranked_text", "load_labels", "round_half_up", "point_split",
    "build_election", "cleanup", "kappa_sizes", "kappa_rule", "ingest", "InvalidElection",
]
