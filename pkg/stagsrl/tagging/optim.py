"""
Adam, gradient clipping, word dropout and the shared epoch loop.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..autodiff.graph import Node, backward
from ..models import TrainingConfig
from ..nn.layers import UNK_SYMBOL

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moments per parameter name and the step counter."""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lrate: float = 0.01,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam; parameter arrays are updated in place."""
    state.t += 1
    correction1 = 1.0 - beta1 ** state.t
    correction2 = 1.0 - beta2 ** state.t
    for name, value in params.items():
        grad = grads.get(name)
        if grad is None:
            continue
        m = state.m.setdefault(name, np.zeros_like(value))
        v = state.v.setdefault(name, np.zeros_like(value))
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        value -= (lrate * m_hat / (np.sqrt(v_hat) + eps)).astype(value.dtype)


def clip_global_norm(grads: Dict[str, np.ndarray], max_norm: float) -> float:
    """Rescale ``grads`` in place so their joint L2 norm is at most ``max_norm``; returns the norm before clipping."""
    norm = float(np.sqrt(sum(float(np.sum(g.astype(np.float64) ** 2)) for g in grads.values())))
    if norm > max_norm:
        factor = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * factor
    return norm


def word_dropout(
    tokens: Sequence[str],
    frequencies: Mapping[str, int],
    alpha: float,
    rng: Optional[np.random.Generator],
    train: bool = True,
) -> List[str]:
    """Replace each word by UNK with probability alpha / (alpha + freq(word))."""
    if not train or alpha <= 0.0:
        return list(tokens)
    draws = rng.random(len(tokens))
    out = []
    for token, draw in zip(tokens, draws):
        p = alpha / (alpha + frequencies.get(token, 0))
        out.append(UNK_SYMBOL if draw < p else token)
    return out


class Adam:
    """Adam over named graph parameters; frozen tensors are skipped."""

    def __init__(self, params: Mapping[str, Node], cfg: TrainingConfig):
        self.params = {name: node for name, node in params.items() if node.requires_grad}
        self.cfg = cfg
        self.state = AdamState()

    def zero_grad(self) -> None:
        for node in self.params.values():
            node.zero_grad()

    def step(self) -> float:
        grads = {
            name: node.grad.astype(node.value.dtype, copy=False)
            for name, node in self.params.items()
            if node.grad is not None
        }
        norm = clip_global_norm(grads, self.cfg.clip_norm)
        adam_step(
            {name: node.value for name, node in self.params.items()},
            grads,
            self.state,
            self.cfg.lrate,
            self.cfg.beta1,
            self.cfg.beta2,
            self.cfg.epsilon,
        )
        return norm


def run_epochs(
    params: Mapping[str, Node],
    n_examples: int,
    loss_fn: Callable[[Sequence[int], np.random.Generator], Node],
    cfg: TrainingConfig,
    rng: np.random.Generator,
    dev_score: Optional[Callable[[], float]] = None,
    progress: bool = False,
    desc: str = "train",
) -> Dict[str, float]:
    """
    Shuffle, batch, backprop and update for ``cfg.epochs`` epochs.

    ``loss_fn`` gets the example indices of one batch. With ``dev_score``
    the parameters of the best-scoring epoch are restored at the end.
    Returns training metadata (final epoch, best dev score and its epoch).
    """
    optimizer = Adam(params, cfg)
    best_score, best_epoch, best_values = None, 0, None

    epochs = tqdm(range(1, cfg.epochs + 1), desc=desc, disable=not progress, leave=False)
    for epoch in epochs:
        order = rng.permutation(n_examples)
        total_loss, batches = 0.0, 0
        for start in range(0, n_examples, cfg.batch_size):
            batch = [int(i) for i in order[start:start + cfg.batch_size]]
            optimizer.zero_grad()
            loss = loss_fn(batch, rng)
            backward(loss)
            optimizer.step()
            total_loss += loss.item()
            batches += 1
        mean_loss = total_loss / max(batches, 1)

        if dev_score is not None:
            score = dev_score()
            logger.info("%s epoch %d: loss=%.4f dev=%.4f", desc, epoch, mean_loss, score)
            if best_score is None or score > best_score:
                best_score, best_epoch = score, epoch
                best_values = {name: node.value.copy() for name, node in params.items()}
        else:
            logger.info("%s epoch %d: loss=%.4f", desc, epoch, mean_loss)
        epochs.set_postfix(loss=f"{mean_loss:.4f}")

    metadata = {"epochs": float(cfg.epochs), "final_loss": mean_loss}
    if best_values is not None:
        for name, node in params.items():
            node.value[...] = best_values[name]
        metadata["best_epoch"] = float(best_epoch)
        metadata["dev_score"] = float(best_score)
        logger.info("%s: restored epoch %d (dev=%.4f)", desc, best_epoch, best_score)
    return metadata
