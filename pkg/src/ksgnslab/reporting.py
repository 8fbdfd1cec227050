"""Residual reports returned by the structural checkers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Named residuals with per-residual pass thresholds."""

    residuals: dict[str, float] = field(default_factory=dict)
    thresholds: dict[str, float] = field(default_factory=dict)

    def add(self, name: str, residual: float, threshold: float) -> None:
        self.residuals[name] = float(residual)
        self.thresholds[name] = float(threshold)

    def merge(self, other: "CheckReport", prefix: str = "") -> None:
        for name, value in other.residuals.items():
            self.add(prefix + name, value, other.thresholds[name])

    @property
    def passed(self) -> bool:
        return all(self.residuals[k] <= self.thresholds[k] for k in self.residuals)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def failing(self) -> list[str]:
        return [k for k in self.residuals if self.residuals[k] > self.thresholds[k]]

    def __repr__(self) -> str:  # compact: only show failures in full
        status = "pass" if self.passed else f"FAIL {self.failing()}"
        return f"CheckReport({status}, max={self.max_residual:.3e})"
