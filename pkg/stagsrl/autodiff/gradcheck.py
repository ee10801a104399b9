"""
Finite-difference verification of analytic gradients.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from .graph import Node, backward

logger = logging.getLogger(__name__)


@dataclass
class GradCheckReport:
    tolerance: float
    errors: Dict[str, float] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def worst(self) -> Optional[str]:
        if not self.errors:
            return None
        return max(self.errors, key=self.errors.get)

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def failures(self) -> Dict[str, float]:
        return {name: err for name, err in self.errors.items() if err >= self.tolerance}


def grad_check(
    f: Callable[[], Node],
    params: Mapping[str, Node],
    step: float = 1e-5,
    tolerance: float = 1e-4,
) -> GradCheckReport:
    """
    Compare backprop gradients of the scalar ``f()`` against central differences.

    ``f`` rebuilds the graph from the current parameter values on every call and
    must be deterministic (seed any dropout inside it). Run in float64.
    Per parameter the error is max |analytic - numeric| / max(1, |numeric|).
    """
    for node in params.values():
        node.zero_grad()
    loss = f()
    backward(loss)
    analytic = {
        name: (node.grad.copy() if node.grad is not None else np.zeros_like(node.value))
        for name, node in params.items()
    }

    report = GradCheckReport(tolerance=tolerance)
    for name, node in params.items():
        value = node.value
        numeric = np.zeros_like(value, dtype=np.float64)
        for idx in np.ndindex(value.shape):
            original = value[idx]
            value[idx] = original + step
            plus = float(f().value)
            value[idx] = original - step
            minus = float(f().value)
            value[idx] = original
            numeric[idx] = (plus - minus) / (2.0 * step)
        diff = np.abs(analytic[name] - numeric) / np.maximum(1.0, np.abs(numeric))
        report.errors[name] = float(diff.max()) if diff.size else 0.0

    for node in params.values():
        node.zero_grad()
    if not report.passed:
        logger.warning("Gradient check failed for %s", sorted(report.failures()))
    return report
