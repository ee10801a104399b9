# Reverse-mode autodiff over numpy arrays
from .graph import Node, Tensor, backward, constant, parameter, zero_grads
from .gradcheck import GradCheckReport, grad_check

__all__ = [
    "Node", "Tensor", "backward", "constant", "parameter", "zero_grads",
    "GradCheckReport", "grad_check",
]
