"""
Neural building blocks shared by the taggers and the role labeler.

Every layer owns its tensors as graph ``Node``s and exposes them through
``parameters()`` under dotted names; checkpoints save and restore by those
names. Frozen tensors (pretrained vectors) are listed too, with
``requires_grad`` off.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..autodiff import ops
from ..autodiff.graph import Node, constant, parameter
from ..corpus.embeddings import EmbeddingTable
from ..errors import ShapeError

logger = logging.getLogger(__name__)

PAD = 0
UNK = 1
PAD_SYMBOL = "<pad>"
UNK_SYMBOL = "<unk>"
MASK_PENALTY = -1e9


def glorot_uniform(rng: np.random.Generator, shape: Tuple[int, int], dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def sequence_mask(lengths: Sequence[int], max_len: Optional[int] = None) -> np.ndarray:
    """(T, B) boolean mask, True where position t is inside sentence b."""
    lengths = np.asarray(lengths)
    max_len = int(lengths.max()) if max_len is None else max_len
    return np.arange(max_len)[:, None] < lengths[None, :]


class EmbeddingBank:
    """
    Symbol vocabulary plus its embedding matrix. Row 0 is PAD, row 1 UNK,
    so every lookup resolves.
    """

    def __init__(
        self,
        symbols: Sequence[str],
        dim: int,
        rng: np.random.Generator,
        dtype=np.float32,
        trainable: bool = True,
        pretrained: Optional[EmbeddingTable] = None,
        name: str = "emb",
    ):
        if dim <= 0:
            raise ShapeError(f"embedding {name} (dim must be positive)", (dim,))
        self.name = name
        self.dim = dim
        self.symbols: List[str] = list(dict.fromkeys(symbols))
        self.index: Dict[str, int] = {s: i + 2 for i, s in enumerate(self.symbols)}
        matrix = rng.uniform(-0.01, 0.01, size=(len(self.symbols) + 2, dim)).astype(dtype)
        matrix[PAD] = 0.0
        if pretrained is not None:
            if pretrained.dim != dim:
                raise ShapeError(f"embedding {name} (pretrained dim)", (dim,), (pretrained.dim,))
            hits = 0
            for symbol, row in self.index.items():
                if symbol in pretrained:
                    matrix[row] = pretrained.lookup(symbol)
                    hits += 1
            matrix[UNK] = pretrained.unk_vector
            logger.debug("Embedding %s: %d/%d symbols pretrained", name, hits, len(self.symbols))
        self.table = Node(matrix, requires_grad=trainable, name=f"{name}.table")

    def __len__(self) -> int:
        return len(self.symbols) + 2

    def id(self, symbol: Optional[str]) -> int:
        if symbol is None:
            return PAD
        return self.index.get(symbol, UNK)

    def ids(self, symbols: Sequence[Optional[str]]) -> np.ndarray:
        return np.array([self.id(s) for s in symbols], dtype=np.int64)

    def lookup(self, ids) -> Node:
        return ops.embedding_lookup(self.table, ids)

    def parameters(self) -> Dict[str, Node]:
        return {f"{self.name}.table": self.table}


class Dense:
    """x W + b"""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float32, name: str = "dense"):
        self.name = name
        self.W = parameter(glorot_uniform(rng, (in_dim, out_dim), dtype), name=f"{name}.W")
        self.b = parameter(np.zeros(out_dim, dtype=dtype), name=f"{name}.b")

    def __call__(self, x: Node) -> Node:
        return ops.add(ops.matmul(x, self.W), self.b)

    def parameters(self) -> Dict[str, Node]:
        return {f"{self.name}.W": self.W, f"{self.name}.b": self.b}


class CharCnn:
    """Character-level word encoder: embed, convolve, max-pool over positions, relu."""

    def __init__(
        self,
        chars: Sequence[str],
        char_dim: int,
        window: int,
        filters: int,
        rng: np.random.Generator,
        dtype=np.float32,
        name: str = "char",
    ):
        if window < 1 or window % 2 == 0:
            raise ShapeError(f"char_cnn (window must be odd, got {window})", (window,))
        self.name = name
        self.window = window
        self.filters = filters
        self.bank = EmbeddingBank(chars, char_dim, rng, dtype, name=f"{name}.emb")
        self.kernel = parameter(glorot_uniform(rng, (window * char_dim, filters), dtype), name=f"{name}.kernel")
        self.bias = parameter(np.zeros(filters, dtype=dtype), name=f"{name}.bias")

    def encode_words(self, words: Sequence[str]) -> Node:
        """(N, filters) for N words; one window is centered on each character."""
        pad = self.window // 2
        lengths = [max(len(w), 1) for w in words]
        width = max(lengths) + 2 * pad
        ids = np.full((len(words), width), PAD, dtype=np.int64)
        for n, word in enumerate(words):
            ids[n, pad:pad + len(word)] = self.bank.ids(list(word))
        positions = width - self.window + 1
        valid = np.arange(positions)[None, :] < np.asarray(lengths)[:, None]
        penalty = np.where(valid, 0.0, MASK_PENALTY).astype(self.kernel.dtype)
        penalty = np.repeat(penalty[:, :, None], self.filters, axis=2)

        conv = ops.add(ops.conv1d(self.bank.lookup(ids), self.kernel, self.window), self.bias)
        pooled = ops.max_over_axis(ops.add(conv, constant(penalty)), axis=1)
        return ops.relu(pooled)

    def encode(self, word: str) -> Node:
        return ops.reshape(self.encode_words([word]), (self.filters,))

    def parameters(self) -> Dict[str, Node]:
        params = self.bank.parameters()
        params[f"{self.name}.kernel"] = self.kernel
        params[f"{self.name}.bias"] = self.bias
        return params


class LstmLayer:
    """
    One LSTM direction over batched inputs (B, input_dim).

    Gates are packed i, f, o, g along the last axis. With ``highway`` the
    emitted state is t*h + (1-t)*(x P), gate t = sigmoid(x Wt + h Ut + bt),
    and that state is what recurs.
    """

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        dtype=np.float32,
        reverse: bool = False,
        recurrent_dropout: float = 0.0,
        highway: bool = False,
        name: str = "lstm",
    ):
        self.name = name
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.reverse = reverse
        self.recurrent_dropout = recurrent_dropout
        self.highway = highway
        H = hidden_dim
        self.W = parameter(glorot_uniform(rng, (input_dim, 4 * H), dtype), name=f"{name}.W")
        self.U = parameter(glorot_uniform(rng, (H, 4 * H), dtype), name=f"{name}.U")
        bias = np.zeros(4 * H, dtype=dtype)
        bias[H:2 * H] = 1.0
        self.b = parameter(bias, name=f"{name}.b")
        if highway:
            self.Wt = parameter(glorot_uniform(rng, (input_dim, H), dtype), name=f"{name}.Wt")
            self.Ut = parameter(glorot_uniform(rng, (H, H), dtype), name=f"{name}.Ut")
            self.bt = parameter(np.zeros(H, dtype=dtype), name=f"{name}.bt")
            self.P = parameter(glorot_uniform(rng, (input_dim, H), dtype), name=f"{name}.P")

    def _gate(self, z: Node, k: int) -> Node:
        H = self.hidden_dim
        return ops.slice_(z, (Ellipsis, slice(k * H, (k + 1) * H)))

    def step(
        self,
        x: Node,
        h_prev: Node,
        c_prev: Node,
        dropout_mask: Optional[np.ndarray] = None,
    ) -> Tuple[Node, Node]:
        if x.shape[-1] != self.input_dim or h_prev.shape[-1] != self.hidden_dim:
            raise ShapeError(f"{self.name} step", x.shape, h_prev.shape)
        h_in = h_prev if dropout_mask is None else ops.mul(h_prev, constant(dropout_mask))
        z = ops.add(ops.add(ops.matmul(x, self.W), ops.matmul(h_in, self.U)), self.b)
        i = ops.sigmoid(self._gate(z, 0))
        f = ops.sigmoid(self._gate(z, 1))
        o = ops.sigmoid(self._gate(z, 2))
        g = ops.tanh(self._gate(z, 3))
        c = ops.add(ops.mul(f, c_prev), ops.mul(i, g))
        h = ops.mul(o, ops.tanh(c))
        if self.highway:
            t = ops.sigmoid(ops.add(ops.add(ops.matmul(x, self.Wt), ops.matmul(h, self.Ut)), self.bt))
            h = ops.add(ops.mul(t, h), ops.mul(ops.one_minus(t), ops.matmul(x, self.P)))
        return h, c

    def run(
        self,
        inputs: Sequence[Node],
        mask: Optional[np.ndarray] = None,
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> List[Node]:
        """Outputs aligned with ``inputs``; padded positions carry the previous state."""
        T = len(inputs)
        B = inputs[0].shape[0]
        dtype = inputs[0].dtype
        h = constant(np.zeros((B, self.hidden_dim), dtype=dtype))
        c = constant(np.zeros((B, self.hidden_dim), dtype=dtype))
        rec_mask = None
        if train and self.recurrent_dropout > 0:
            rec_mask = ops.dropout_mask((B, self.hidden_dim), self.recurrent_dropout, rng, dtype)

        outputs: List[Optional[Node]] = [None] * T
        steps = range(T - 1, -1, -1) if self.reverse else range(T)
        for t in steps:
            h_new, c_new = self.step(inputs[t], h, c, rec_mask)
            if mask is None or mask[t].all():
                h, c = h_new, c_new
            else:
                keep = np.repeat(mask[t][:, None], self.hidden_dim, axis=1).astype(dtype)
                carry = constant(1.0 - keep)
                keep = constant(keep)
                h = ops.add(ops.mul(h_new, keep), ops.mul(h, carry))
                c = ops.add(ops.mul(c_new, keep), ops.mul(c, carry))
            outputs[t] = h
        return outputs

    def parameters(self) -> Dict[str, Node]:
        params = {f"{self.name}.W": self.W, f"{self.name}.U": self.U, f"{self.name}.b": self.b}
        if self.highway:
            params.update({
                f"{self.name}.Wt": self.Wt, f"{self.name}.Ut": self.Ut,
                f"{self.name}.bt": self.bt, f"{self.name}.P": self.P,
            })
        return params


class BiLstm:
    """
    k stacked bidirectional layers. Layer l > 1 reads the concatenated
    forward/backward outputs of layer l-1; inter-layer dropout is resampled
    per token while recurrent masks are fixed per sequence.
    """

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        layers: int,
        rng: np.random.Generator,
        dtype=np.float32,
        dropout: float = 0.0,
        recurrent_dropout: float = 0.0,
        highway: bool = False,
        name: str = "bilstm",
    ):
        if layers < 1:
            raise ShapeError(f"{name} (need at least one layer)", (layers,))
        self.name = name
        self.hidden_dim = hidden_dim
        self.dropout = dropout
        self.layers: List[Tuple[LstmLayer, LstmLayer]] = []
        dim = input_dim
        for k in range(layers):
            fwd = LstmLayer(dim, hidden_dim, rng, dtype, False, recurrent_dropout, highway, f"{name}.{k}.fwd")
            bwd = LstmLayer(dim, hidden_dim, rng, dtype, True, recurrent_dropout, highway, f"{name}.{k}.bwd")
            self.layers.append((fwd, bwd))
            dim = 2 * hidden_dim

    @property
    def output_dim(self) -> int:
        return 2 * self.hidden_dim

    def forward(
        self,
        inputs: Sequence[Node],
        mask: Optional[np.ndarray] = None,
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> List[Node]:
        if not inputs:
            raise ShapeError(f"{self.name} (empty sequence)")
        xs = list(inputs)
        for k, (fwd, bwd) in enumerate(self.layers):
            if k > 0 and train and self.dropout > 0:
                xs = [ops.dropout(x, self.dropout, rng) for x in xs]
            forward_out = fwd.run(xs, mask, train, rng)
            backward_out = bwd.run(xs, mask, train, rng)
            xs = [ops.concat([f, b], axis=-1) for f, b in zip(forward_out, backward_out)]
        return xs

    def parameters(self) -> Dict[str, Node]:
        params: Dict[str, Node] = {}
        for fwd, bwd in self.layers:
            params.update(fwd.parameters())
            params.update(bwd.parameters())
        return params
