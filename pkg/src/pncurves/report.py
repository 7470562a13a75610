"""Verification reports shared by the checks and the CLI."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field


@dataclass
class Cell:
    params: dict
    check: str
    passed: bool
    detail: str = ""
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "check": self.check,
            "passed": self.passed,
            "detail": self.detail,
            "elapsed": round(self.elapsed, 6),
        }


@dataclass
class Report:
    suite: str
    cells: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    def add(self, params: dict, check: str, passed: bool, detail: str = "", elapsed: float = 0.0) -> Cell:
        cell = Cell(dict(params), check, bool(passed), detail, elapsed)
        self.cells.append(cell)
        return cell

    def extend(self, other: "Report") -> None:
        self.cells.extend(other.cells)

    @contextmanager
    def timed(self, params: dict, check: str):
        """Add a cell whose outcome the body sets via the yielded dict."""
        box = {"passed": False, "detail": ""}
        t0 = time.perf_counter()
        try:
            yield box
        finally:
            self.add(params, check, box["passed"], box["detail"], time.perf_counter() - t0)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "cells": [c.to_dict() for c in self.cells],
        }

    def lines(self) -> list:
        out = []
        for c in self.cells:
            params = " ".join(f"{k}={v}" for k, v in c.params.items())
            status = "PASS" if c.passed else "FAIL"
            line = f"{status}  {c.check:<28} {params}"
            if c.detail:
                line += f"  ({c.detail})"
            out.append(line)
        out.append(f"{'PASS' if self.passed else 'FAIL'}  suite {self.suite}: "
                   f"{sum(c.passed for c in self.cells)}/{len(self.cells)} checks")
        return out
