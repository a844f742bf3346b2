"""Benchmark/report harness tying solvers and oracles together.

Rows run concurrently up to a jobs limit; per-row failures are recorded
and never abort the suite; the assembled report is sorted by (instance,
algorithm) so output order is independent of scheduling.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .dp import harmonic
from .errors import ConvoyOptError
from .flow import solve_tmo_additive
from .oracles import DEFAULT_BUDGET, OracleBudget, exact_tmo_convoy
from .reduction import solve_tmo_blackbox
from .spdecomp import decompose, phi
from .tmo import TmoInstance, convoy_makespan


@dataclass
class BenchRow:
    instance: str
    algorithm: str
    value: Optional[int] = None
    oracle: Optional[int] = None
    ratio: Optional[str] = None
    bound: Optional[str] = None
    seconds: float = 0.0
    error: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "instance": self.instance,
            "algorithm": self.algorithm,
            "value": self.value,
            "oracle": self.oracle,
            "ratio": self.ratio,
            "bound": self.bound,
            "seconds": round(self.seconds, 6),
            "error": self.error,
        }


@dataclass
class BenchConfig:
    instances: list[tuple[str, TmoInstance]]
    algorithms: list[str] = field(default_factory=lambda: ["flow"])
    with_oracle: bool = True
    jobs: int = 1
    budget: OracleBudget = DEFAULT_BUDGET
    epsilon: str = "1/2"


def _solve(inst: TmoInstance, algorithm: str, cfg: BenchConfig) -> int:
    if algorithm == "flow":
        return convoy_makespan(inst, solve_tmo_additive(inst))
    if algorithm == "blackbox":
        from .dp import dp_solve

        def solver(g, k):
            return dp_solve(g, decompose(g), k, "balanced")

        eps = Fraction(cfg.epsilon)
        return convoy_makespan(inst, solve_tmo_blackbox(inst, eps, solver))
    if algorithm == "oracle":
        return convoy_makespan(inst, exact_tmo_convoy(inst, cfg.budget))
    raise ConvoyOptError(f"unknown algorithm {algorithm!r}")


def _bound_for(inst: TmoInstance, algorithm: str, oracle: Optional[int], cfg: BenchConfig) -> Optional[str]:
    if algorithm == "flow":
        if oracle:
            return str(1 + Fraction(inst.delta, oracle))
        return f"OPT+{inst.delta}"
    if algorithm == "blackbox":
        try:
            k = len(exact_tmo_convoy(inst, cfg.budget).paths) if oracle is not None else None
        except ConvoyOptError:
            k = None
        eps = Fraction(cfg.epsilon)
        if k is not None:
            return str(max(harmonic(k), 1 + eps))
        return f"max(H_k, {1 + eps})"
    if algorithm == "oracle":
        return "1"
    return None


def run_bench(cfg: BenchConfig) -> list[BenchRow]:
    oracle_values: dict[str, Optional[int]] = {}
    if cfg.with_oracle:
        for name, inst in cfg.instances:
            try:
                oracle_values[name] = convoy_makespan(
                    inst, exact_tmo_convoy(inst, cfg.budget)
                )
            except ConvoyOptError:
                oracle_values[name] = None

    tasks = [
        (name, inst, algo)
        for name, inst in cfg.instances
        for algo in cfg.algorithms
    ]

    def run_one(task) -> BenchRow:
        name, inst, algo = task
        row = BenchRow(instance=name, algorithm=algo)
        start = time.perf_counter()
        try:
            row.value = _solve(inst, algo, cfg)
            oracle = oracle_values.get(name)
            row.oracle = oracle
            if oracle:
                row.ratio = str(Fraction(row.value, oracle))
            elif oracle == 0:
                row.ratio = "1" if row.value == 0 else "inf"
            row.bound = _bound_for(inst, algo, oracle, cfg)
        except ConvoyOptError as e:
            row.error = f"{type(e).__name__}: {e}"
        row.seconds = time.perf_counter() - start
        return row

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(run_one, tasks))
    else:
        rows = [run_one(t) for t in tasks]
    rows.sort(key=lambda r: (r.instance, r.algorithm))
    return rows


def format_report(rows: list[BenchRow]) -> str:
    headers = ["instance", "algorithm", "value", "oracle", "ratio", "bound", "seconds", "error"]
    table = [headers]
    for r in rows:
        d = r.as_dict()
        table.append(["" if d[h] is None else str(d[h]) for h in headers])
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = []
    for idx, row in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(headers))).rstrip())
    return "\n".join(lines) + "\n"
