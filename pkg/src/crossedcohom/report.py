"""Pass/fail reports with witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class BoundExceeded(RuntimeError):
    """An enumeration would exceed its configured size bound."""

    def __init__(self, what: str, size: int, bound: int):
        super().__init__(f"{what}: search space {size} exceeds bound {bound}")
        self.what = what
        self.size = size
        self.bound = bound


DEFAULT_BOUND = 10**7


@dataclass
class Check:
    name: str
    passed: bool
    witness: Any = None


@dataclass
class Report:
    title: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, witness: Any = None) -> bool:
        self.checks.append(Check(name, bool(passed), None if passed else witness))
        return bool(passed)

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.witness))

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self):
        return self.ok

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "witness": _plain(c.witness)} for c in self.checks
            ],
            "data": _plain(self.data),
        }

    def to_text(self) -> str:
        lines = [f"== {self.title} =="]
        for k, v in self.data.items():
            lines.append(f"  {k}: {_plain(v)}")
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            line = f"  [{mark}] {c.name}"
            if not c.passed and c.witness is not None:
                line += f"  witness: {_plain(c.witness)}"
            lines.append(line)
        lines.append("  verdict: " + ("all pass" if self.ok else "FAILED"))
        return "\n".join(lines)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x, key=repr) if isinstance(x, (set, frozenset)) else x
        return [_plain(v) for v in items]
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    if hasattr(x, "item") and callable(x.item):
        return x.item()
    return repr(x)
