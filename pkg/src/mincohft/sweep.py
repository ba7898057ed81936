"""
Sweep configuration, insertion universes, worker pool and reports.

Each (g, n) cell is a pure work item; results are merged in sorted order
so the emitted report does not depend on scheduling or on ``jobs``.
"""

from __future__ import annotations

import json
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Any, Callable, Iterable, Sequence

from .errors import DomainError
from .state_space import BasisVector, format_insertions

AXIOM_ORDER = ("i", "ii-q", "ii-r", "cases", "iii", "iii-unit", "even", "topft-preserving",
               "isotropic", "minimal", "takes-value")


@dataclass
class SweepConfig:
    h: int = 1
    m: int = 1
    deg: int = 2
    mode: str = "graded"
    g_max: int | None = None
    n_max: int | None = None
    n_exh: int = 6
    sample_count: int = 10_000
    seed: int = 0
    # tuples per cell beyond which a cell is sampled even when n <= n_exh
    exhaustive_cap: int = 6 ** 6
    # graphs checked for every orbit representative before sampling kicks in
    graph_cap: int = 256
    # random graphs checked for each raw insertion tuple
    graphs_per_tuple: int = 2
    jobs: int | None = None
    detail: str = "summary"
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.g_max is None:
            self.g_max = self.h + 2
        if self.n_max is None:
            self.n_max = self.m + 3
        if self.g_max < self.h:
            raise DomainError(f"g_max={self.g_max} must be at least h={self.h}")
        if self.n_max < self.m:
            raise DomainError(f"n_max={self.n_max} must be at least m={self.m}")
        if self.detail not in ("summary", "full"):
            raise DomainError(f"detail must be 'summary' or 'full', got {self.detail!r}")
        if self.format not in ("json", "csv", "text"):
            raise DomainError(f"format must be json, csv or text, got {self.format!r}")

    def sweep_json(self) -> dict:
        return {
            "g_max": self.g_max,
            "n_max": self.n_max,
            "n_exh": self.n_exh,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "exhaustive_cap": self.exhaustive_cap,
            "graph_cap": self.graph_cap,
            "graphs_per_tuple": self.graphs_per_tuple,
        }


def cell_rng(seed: int, *labels: Any) -> random.Random:
    # str seeds hash through sha512, so this is stable across processes
    return random.Random(":".join(map(str, (seed,) + labels)))


def universe(
    basis: Sequence[BasisVector],
    g: int,
    n: int,
    config: SweepConfig,
    targeted: Callable[[random.Random, int], Iterable[tuple[BasisVector, ...]]] | None = None,
) -> tuple[str, list[tuple[BasisVector, ...]]]:
    """
    Insertion tuples for the cell (g, n): every tuple when the cell is
    small, otherwise the targeted tuples supplied by the theory plus
    uniform samples, ``sample_count`` in total.
    """
    if n <= config.n_exh and len(basis) ** n <= config.exhaustive_cap:
        return "exhaustive", list(product(basis, repeat=n))
    rng = cell_rng(config.seed, "universe", g, n)
    chosen: set[tuple[BasisVector, ...]] = set()
    if targeted is not None:
        for t in targeted(rng, config.sample_count // 2):
            chosen.add(tuple(t))
    attempts = 0
    while len(chosen) < config.sample_count and attempts < 4 * config.sample_count:
        chosen.add(tuple(rng.choice(basis) for _ in range(n)))
        attempts += 1
    return "sampled", sorted(chosen)


@dataclass
class CheckRecord:
    axiom: str
    g: int
    n: int
    insertions: tuple[str, ...]
    graph: str | None
    ok: bool
    lhs: str = ""
    rhs: str = ""

    def to_json(self, with_sides: bool = False) -> dict:
        out = {
            "axiom": self.axiom,
            "g": self.g,
            "n": self.n,
            "insertions": list(self.insertions),
            "graph": self.graph,
            "status": "pass" if self.ok else "fail",
        }
        if with_sides:
            out["lhs"] = self.lhs
            out["rhs"] = self.rhs
        return out

    def sort_key(self):
        return (_axiom_rank(self.axiom), self.g, self.n, self.insertions, self.graph or "")


def _axiom_rank(axiom: str) -> int:
    return AXIOM_ORDER.index(axiom) if axiom in AXIOM_ORDER else len(AXIOM_ORDER)


@dataclass
class GroupStats:
    """Aggregated outcome of one axiom on one (g, n) cell."""

    axiom: str
    g: int
    n: int
    coverage: str = ""
    tuples: int = 0
    graphs: int = 0
    passed: int = 0
    failed: int = 0
    untested: int = 0

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom,
            "g": self.g,
            "n": self.n,
            "insertions": {"coverage": self.coverage, "count": self.tuples},
            "graph": {"count": self.graphs} if self.graphs else None,
            "status": "fail" if self.failed else ("untested" if not self.passed and self.untested else "pass"),
            "passed": self.passed,
            "failed": self.failed,
            "untested": self.untested,
        }


class CellResult:
    """Collects the checks of one work item."""

    def __init__(self, g: int, n: int, detail: str):
        self.g, self.n = g, n
        self.detail = detail
        self.stats: dict[str, GroupStats] = {}
        self.records: list[CheckRecord] = []
        self.counterexamples: list[CheckRecord] = []
        self._graphs: dict[str, set] = {}
        self._tuples: dict[str, set] = {}

    def group(self, axiom: str, coverage: str = "") -> GroupStats:
        st = self.stats.get(axiom)
        if st is None:
            st = self.stats[axiom] = GroupStats(axiom, self.g, self.n, coverage)
            self._graphs[axiom] = set()
            self._tuples[axiom] = set()
        elif coverage and coverage not in st.coverage.split("+"):
            st.coverage = "+".join(sorted(set(st.coverage.split("+")) - {""} | {coverage}))
        return st

    def add(self, axiom: str, insertions, ok: bool, graph: Any = None,
            lhs: Any = "", rhs: Any = "", coverage: str = "", g: int | None = None, n: int | None = None) -> None:
        st = self.group(axiom, coverage)
        self._tuples[axiom].add(insertions)
        if graph is not None:
            self._graphs[axiom].add(graph)
        if ok:
            st.passed += 1
        else:
            st.failed += 1
        g = self.g if g is None else g
        n = self.n if n is None else n
        if not ok or self.detail == "full":
            label = graph if graph is None or isinstance(graph, str) else graph.label()
            ins = tuple(format_insertions(insertions))
            rec = CheckRecord(axiom, g, n, ins, label, ok, str(lhs), str(rhs))
            if not ok:
                self.counterexamples.append(rec)
            if self.detail == "full":
                self.records.append(rec)

    def untested(self, axiom: str, count: int = 1, coverage: str = "") -> None:
        self.group(axiom, coverage).untested += count

    def finish(self) -> "CellResult":
        for axiom, st in self.stats.items():
            st.tuples = len(self._tuples[axiom])
            st.graphs = len(self._graphs[axiom])
        self._graphs, self._tuples = {}, {}
        return self


def default_jobs(jobs: int | None) -> int:
    env = os.environ.get("COHFT_JOBS")
    if env:
        return max(1, int(env))
    if jobs:
        return max(1, jobs)
    return os.cpu_count() or 1


def run_items(fn: Callable, items: Sequence, jobs: int | None) -> list:
    """Map ``fn`` over ``items``; results come back in item order."""
    n_jobs = default_jobs(jobs)
    if n_jobs == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


@dataclass
class VerificationReport:
    gamma: dict
    sweep: dict
    checks: list[dict] = field(default_factory=list)
    counterexamples: list[dict] = field(default_factory=list)
    totals: dict = field(default_factory=dict)

    @classmethod
    def from_cells(cls, gamma: dict, sweep: dict, cells: Iterable[CellResult], detail: str) -> "VerificationReport":
        stats: list[GroupStats] = []
        records: list[CheckRecord] = []
        bad: list[CheckRecord] = []
        for cell in cells:
            stats.extend(cell.stats.values())
            records.extend(cell.records)
            bad.extend(cell.counterexamples)
        stats.sort(key=lambda s: (_axiom_rank(s.axiom), s.g, s.n))
        records.sort(key=CheckRecord.sort_key)
        bad.sort(key=CheckRecord.sort_key)
        checks = [r.to_json() for r in records] if detail == "full" else [s.to_json() for s in stats]
        totals = {
            "passed": sum(s.passed for s in stats),
            "failed": sum(s.failed for s in stats),
            "untested": sum(s.untested for s in stats),
        }
        return cls(gamma, sweep, checks, [r.to_json(with_sides=True) for r in bad], totals)

    @property
    def ok(self) -> bool:
        return self.totals.get("failed", 0) == 0

    def failed_axioms(self) -> set[str]:
        return {c["axiom"] for c in self.counterexamples}

    def passed_count(self, axiom: str) -> int:
        return sum(c.get("passed", c.get("status") == "pass") for c in self.checks if c["axiom"] == axiom)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [f"gamma: {self.gamma}", f"sweep: {self.sweep}"]
        for c in self.checks:
            lines.append(
                f"{c['axiom']:<16} g={c['g']} n={c['n']} {c['status']}"
                + (f" passed={c['passed']} failed={c['failed']}" if "passed" in c else "")
            )
        for c in self.counterexamples:
            lines.append(f"COUNTEREXAMPLE {c}")
        lines.append(f"totals: {self.totals}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["axiom", "g", "n", "status", "passed", "failed", "untested"])
        for c in self.checks:
            w.writerow([c["axiom"], c["g"], c["n"], c["status"], c.get("passed", ""), c.get("failed", ""),
                        c.get("untested", "")])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "text": self.to_text, "csv": self.to_csv}[fmt]()
