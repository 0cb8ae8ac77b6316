# Copyright 2025 The Inflect Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Inflect Classifier

Statement / normal question / declarative question classifier.

A character embedder with a [CLS] slot produces token vectors h_t; a
self-attention pooling layer scores them, e_t = v^T tanh(W h_t + b),
normalizes the scores with a softmax into alpha_t and sums s = sum alpha_t h_t;
an affine head with softmax gives class probabilities. Training minimizes
class-weighted cross-entropy with hand-written gradients and plain gradient
descent. The intonation table maps each sentence type to the embedding that
conditions contour rendering.
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Tuple

import numpy as np

from inflect_corpus import SentenceType

logger = logging.getLogger(__name__)

CLS_TOKEN = "[CLS]"
UNK_TOKEN = "[UNK]"
NUM_CLASSES = 3
INIT_SCALE = 0.1
CHECKPOINT_VERSION = "1"

DEFAULT_EMBED_DIM = 64
DEFAULT_ATTENTION_DIM = 64
DEFAULT_INTONATION_DIM = 512
DEFAULT_CLASS_WEIGHTS = (1.0, 10.0, 20.0)


class CheckpointError(ValueError):
    """Checkpoint JSON is unreadable or inconsistent"""


class TokenEmbedder:
    """Character vocabulary and embedding matrix; [CLS] is index 0, [UNK] index 1"""

    def __init__(self, tokens, matrix, trainable=True):
        tokens = list(tokens)
        if tokens[:2] != [CLS_TOKEN, UNK_TOKEN]:
            raise ValueError(f"Vocabulary must start with {CLS_TOKEN}, {UNK_TOKEN}; got {tokens[:2]}")
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(tokens) or matrix.shape[1] <= 0:
            raise ValueError(f"Embedding matrix shape {matrix.shape} does not fit {len(tokens)} tokens")
        if len(set(tokens)) != len(tokens):
            raise ValueError("Vocabulary contains duplicate tokens")
        self.tokens = tokens
        self.index = {tok: i for i, tok in enumerate(tokens)}
        self.matrix = matrix
        self.trainable = trainable

    @property
    def dim(self):
        return self.matrix.shape[1]

    def ids(self, text):
        """[CLS] followed by one id per character"""
        if not text:
            raise ValueError("Cannot encode empty text")
        unk = self.index[UNK_TOKEN]
        return np.array([0] + [self.index.get(ch, unk) for ch in text], dtype=np.int64)

    def copy(self):
        return TokenEmbedder(self.tokens, self.matrix.copy(), self.trainable)


@dataclass
class PoolingParams:
    W: np.ndarray
    b: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        d_a = self.W.shape[0]
        if d_a <= 0 or self.b.shape != (d_a,) or self.v.shape != (d_a,):
            raise ValueError(f"Pooling shapes disagree: W {self.W.shape}, b {self.b.shape}, v {self.v.shape}")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.v))):
            raise ValueError("Pooling parameters must be finite")


@dataclass
class AttentionOutput:
    s: np.ndarray
    alpha: np.ndarray
    scores: np.ndarray


@dataclass
class ClassifierParams:
    embedder: TokenEmbedder
    pooling: PoolingParams
    head_W: np.ndarray
    head_b: np.ndarray
    intonation_table: np.ndarray

    def __post_init__(self):
        d = self.embedder.dim
        if self.head_W.shape != (NUM_CLASSES, d) or self.head_b.shape != (NUM_CLASSES,):
            raise ValueError(f"Head must be {NUM_CLASSES} x {d}, got {self.head_W.shape} / {self.head_b.shape}")
        if self.pooling.W.shape[1] != d:
            raise ValueError(f"Pooling W {self.pooling.W.shape} does not match embedding dim {d}")
        if self.intonation_table.ndim != 2 or self.intonation_table.shape[0] != NUM_CLASSES:
            raise ValueError(f"Intonation table must have {NUM_CLASSES} rows, got {self.intonation_table.shape}")

    def copy(self):
        return ClassifierParams(
            embedder=self.embedder.copy(),
            pooling=PoolingParams(self.pooling.W.copy(), self.pooling.b.copy(), self.pooling.v.copy()),
            head_W=self.head_W.copy(),
            head_b=self.head_b.copy(),
            intonation_table=self.intonation_table.copy(),
        )


@dataclass(frozen=True)
class TrainConfig:
    """Defaults are desk-scale; lr 1e-5 and batch 512 remain expressible"""

    learning_rate: float = 0.1
    batch_size: int = 32
    epochs: int = 200
    class_weights: Tuple[float, float, float] = DEFAULT_CLASS_WEIGHTS
    seed: int = 0
    freeze_embedder: bool = False
    embed_dim: int = DEFAULT_EMBED_DIM
    attention_dim: int = DEFAULT_ATTENTION_DIM
    intonation_dim: int = DEFAULT_INTONATION_DIM

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"Invalid learning rate: {self.learning_rate} (must be positive)")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError(f"Invalid batch_size/epochs: {self.batch_size}/{self.epochs}")
        if len(self.class_weights) != NUM_CLASSES or min(self.class_weights) <= 0:
            raise ValueError(f"class_weights must be {NUM_CLASSES} positive values, got {self.class_weights}")
        if min(self.embed_dim, self.attention_dim, self.intonation_dim) <= 0:
            raise ValueError("Embedding, attention and intonation dimensions must be positive")


@dataclass
class Gradients:
    embedding: np.ndarray
    W: np.ndarray
    b: np.ndarray
    v: np.ndarray
    head_W: np.ndarray
    head_b: np.ndarray

    def blocks(self):
        return {"embedding": self.embedding, "W": self.W, "b": self.b, "v": self.v,
                "head_W": self.head_W, "head_b": self.head_b}


@dataclass
class TrainHistory:
    loss: List[float] = field(default_factory=list)
    accuracy: List[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def build_vocabulary(texts):
    """Specials followed by every character of the texts, by code point"""
    chars = sorted({ch for text in texts for ch in text})
    return [CLS_TOKEN, UNK_TOKEN] + [ch for ch in chars if ch not in (CLS_TOKEN, UNK_TOKEN)]


def init_params(tokens, embed_dim=DEFAULT_EMBED_DIM, attention_dim=DEFAULT_ATTENTION_DIM,
                intonation_dim=DEFAULT_INTONATION_DIM, seed=0, trainable=True, embedding=None):
    """Seeded uniform init in [-0.1, 0.1] for every block"""
    rng = np.random.default_rng(seed)

    def uniform(*shape):
        return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)

    matrix = uniform(len(tokens), embed_dim) if embedding is None else np.asarray(embedding, dtype=np.float64)
    d = matrix.shape[1]
    return ClassifierParams(
        embedder=TokenEmbedder(tokens, matrix, trainable),
        pooling=PoolingParams(uniform(attention_dim, d), uniform(attention_dim), uniform(attention_dim)),
        head_W=uniform(NUM_CLASSES, d),
        head_b=uniform(NUM_CLASSES),
        intonation_table=uniform(NUM_CLASSES, intonation_dim),
    )


def load_embedding_tsv(path, seed=0, trainable=False):
    """
    Read externally computed token vectors: token<TAB>f1<TAB>...<TAB>fd

    [CLS] and [UNK] get seeded uniform vectors when the file lacks them.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Embedding file not found: {path}")

    vectors = {}
    order = []
    dim = None
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            token = fields[0]
            try:
                values = [float(x) for x in fields[1:]]
            except ValueError:
                raise ValueError(f"{path}:{line_no}: non-numeric embedding value") from None
            if dim is None:
                dim = len(values)
            if len(values) != dim or dim == 0:
                raise ValueError(f"{path}:{line_no}: expected {dim} values, got {len(values)}")
            if token in vectors:
                raise ValueError(f"{path}:{line_no}: duplicate token '{token}'")
            vectors[token] = values
            order.append(token)
    if dim is None:
        raise ValueError(f"{path}: no embeddings found")

    rng = np.random.default_rng(seed)
    tokens = [CLS_TOKEN, UNK_TOKEN] + [t for t in order if t not in (CLS_TOKEN, UNK_TOKEN)]
    rows = [vectors[t] if t in vectors else rng.uniform(-INIT_SCALE, INIT_SCALE, size=dim) for t in tokens]
    return TokenEmbedder(tokens, np.array(rows, dtype=np.float64), trainable)


# ---------------------------------------------------------------------------
# forward pieces
# ---------------------------------------------------------------------------

def _softmax(x, axis=-1):
    z = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def encode_tokens(text, embedder):
    """T x d matrix: row 0 is [CLS], then one row per character ([UNK] if unseen)"""
    return embedder.matrix[embedder.ids(text)]


def attention_pool(H, pooling):
    """
    Self-attention pooling

    e_t = v^T tanh(W h_t + b), alpha = softmax(e), s = sum_t alpha_t h_t
    """
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    if H.shape[0] < 1:
        raise ValueError("attention_pool needs at least one token")
    if H.shape[1] != pooling.W.shape[1]:
        raise ValueError(f"Token dim {H.shape[1]} does not match pooling W {pooling.W.shape}")
    scores = np.tanh(H @ pooling.W.T + pooling.b) @ pooling.v
    alpha = _softmax(scores)
    return AttentionOutput(s=alpha @ H, alpha=alpha, scores=scores)


def classify(s, head_W, head_b):
    """Softmax of the affine head; probabilities over the three classes"""
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (head_W.shape[1],):
        raise ValueError(f"Sentence embedding shape {s.shape} does not match head {head_W.shape}")
    return _softmax(head_W @ s + head_b)


def weighted_cross_entropy(probs, label, class_weights):
    """-class_weights[label] * ln(probs[label])"""
    p = float(probs[int(label)])
    if p <= 0.0:
        raise ValueError("Probability of the true class is zero; use batch_loss")
    return -float(class_weights[int(label)]) * float(np.log(p))


# ---------------------------------------------------------------------------
# batched forward / backward
# ---------------------------------------------------------------------------

def _pad_batch(params, texts):
    seqs = [params.embedder.ids(t) for t in texts]
    length = max(len(s) for s in seqs)
    ids = np.zeros((len(seqs), length), dtype=np.int64)
    mask = np.zeros((len(seqs), length), dtype=bool)
    for k, s in enumerate(seqs):
        ids[k, :len(s)] = s
        mask[k, :len(s)] = True
    return ids, mask


def _forward(params, ids, mask):
    H = params.embedder.matrix[ids]
    A = np.tanh(H @ params.pooling.W.T + params.pooling.b)
    scores = A @ params.pooling.v
    scores = np.where(mask, scores, -np.inf)
    alpha = _softmax(scores, axis=1)
    s = np.einsum("bt,btd->bd", alpha, H)
    logits = s @ params.head_W.T + params.head_b
    return H, A, alpha, s, logits


def _log_softmax(logits):
    m = np.max(logits, axis=1, keepdims=True)
    return logits - m - np.log(np.sum(np.exp(logits - m), axis=1, keepdims=True))


def batch_loss(params, batch, class_weights=DEFAULT_CLASS_WEIGHTS):
    """Mean weighted cross-entropy over (text, label) pairs"""
    texts = [t for t, _ in batch]
    labels = np.array([int(y) for _, y in batch])
    ids, mask = _pad_batch(params, texts)
    logits = _forward(params, ids, mask)[-1]
    weights = np.asarray(class_weights, dtype=np.float64)[labels]
    log_p = _log_softmax(logits)[np.arange(len(labels)), labels]
    return float(np.mean(-weights * log_p))


def gradients(params, batch, class_weights=DEFAULT_CLASS_WEIGHTS, freeze_embedder=None):
    """
    Mean over the batch of per-example gradients of the weighted CE

    The embedding block is exactly zero when the embedder is frozen
    (freeze_embedder defaults to not embedder.trainable).

    Returns:
        (loss, Gradients)
    """
    batch = list(batch)
    if not batch:
        raise ValueError("gradients needs a nonempty batch")
    if freeze_embedder is None:
        freeze_embedder = not params.embedder.trainable

    texts = [t for t, _ in batch]
    labels = np.array([int(y) for _, y in batch])
    n = len(batch)
    ids, mask = _pad_batch(params, texts)
    H, A, alpha, s, logits = _forward(params, ids, mask)

    weights = np.asarray(class_weights, dtype=np.float64)[labels]
    log_p = _log_softmax(logits)
    loss = float(np.mean(-weights * log_p[np.arange(n), labels]))

    # head
    dlogits = np.exp(log_p)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits *= (weights / n)[:, None]
    d_head_W = dlogits.T @ s
    d_head_b = dlogits.sum(axis=0)
    ds = dlogits @ params.head_W

    # pooling: s = sum_t alpha_t h_t
    dH = alpha[:, :, None] * ds[:, None, :]
    dalpha = np.einsum("btd,bd->bt", H, ds)
    dscores = alpha * (dalpha - np.sum(alpha * dalpha, axis=1, keepdims=True))
    dscores = np.where(mask, dscores, 0.0)

    # scores: e_t = v . tanh(W h_t + b)
    d_v = np.einsum("bt,bta->a", dscores, A)
    dpre = dscores[:, :, None] * params.pooling.v[None, None, :] * (1.0 - A ** 2)
    d_W = np.einsum("bta,btd->ad", dpre, H)
    d_b = dpre.sum(axis=(0, 1))
    dH += dpre @ params.pooling.W

    d_embedding = np.zeros_like(params.embedder.matrix)
    if not freeze_embedder:
        np.add.at(d_embedding, ids[mask], dH[mask])

    return loss, Gradients(embedding=d_embedding, W=d_W, b=d_b, v=d_v, head_W=d_head_W, head_b=d_head_b)


def _param_blocks(params):
    return {"embedding": params.embedder.matrix, "W": params.pooling.W, "b": params.pooling.b,
            "v": params.pooling.v, "head_W": params.head_W, "head_b": params.head_b}


def apply_gradients(params, grads, learning_rate, freeze_embedder=False):
    """In-place plain gradient descent step"""
    blocks = _param_blocks(params)
    for name, g in grads.blocks().items():
        if name == "embedding" and freeze_embedder:
            continue
        blocks[name] -= learning_rate * g


def check_gradients(params, batch, class_weights=DEFAULT_CLASS_WEIGHTS, eps=1e-5):
    """
    Compare analytic gradients with central finite differences

    The relative error of a block is max|analytic - numeric| divided by
    max(max|analytic|, max|numeric|, 1e-8). Only embedding rows used by the
    batch are perturbed.

    Returns:
        dict block name -> relative error
    """
    params = params.copy()
    _, analytic = gradients(params, batch, class_weights, freeze_embedder=False)
    blocks = _param_blocks(params)

    used_rows = set()
    for text, _ in batch:
        used_rows.update(params.embedder.ids(text).tolist())

    errors = {}
    for name, values in blocks.items():
        a = analytic.blocks()[name]
        numeric = np.zeros_like(values)
        if name == "embedding":
            coords = [(r, c) for r in sorted(used_rows) for c in range(values.shape[1])]
        else:
            coords = list(np.ndindex(values.shape))
        for idx in coords:
            original = values[idx]
            values[idx] = original + eps
            plus = batch_loss(params, batch, class_weights)
            values[idx] = original - eps
            minus = batch_loss(params, batch, class_weights)
            values[idx] = original
            numeric[idx] = (plus - minus) / (2.0 * eps)
        scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(numeric))), 1e-8)
        errors[name] = float(np.max(np.abs(a - numeric))) / scale
    return errors


# ---------------------------------------------------------------------------
# training and inference
# ---------------------------------------------------------------------------

def evaluate_accuracy(params, dataset):
    """Overall and per-class accuracy of argmax predictions"""
    dataset = list(dataset)
    if not dataset:
        raise ValueError("evaluate_accuracy needs a nonempty dataset")
    ids, mask = _pad_batch(params, [t for t, _ in dataset])
    predicted = np.argmax(_forward(params, ids, mask)[-1], axis=1)
    labels = np.array([int(y) for _, y in dataset])
    result = {"All": float(np.mean(predicted == labels))}
    for t in SentenceType:
        members = labels == int(t)
        result[t.short] = float(np.mean(predicted[members] == int(t))) if members.any() else None
    return result


def train(dataset, cfg=None, params=None):
    """
    Train the classifier with mini-batch plain gradient descent

    Args:
        dataset: sequence of (text, SentenceType)
        cfg: TrainConfig
        params: optional starting parameters (e.g. with a loaded embedder);
            a fresh seeded init over the dataset vocabulary otherwise

    Returns:
        (ClassifierParams, TrainHistory) with loss/accuracy over the whole
        dataset after every epoch
    """
    cfg = cfg or TrainConfig()
    dataset = [(text, SentenceType(label)) for text, label in dataset]
    if not dataset:
        raise ValueError("Cannot train on an empty dataset")

    if params is None:
        params = init_params(build_vocabulary(t for t, _ in dataset), cfg.embed_dim, cfg.attention_dim,
                             cfg.intonation_dim, cfg.seed, trainable=not cfg.freeze_embedder)
    else:
        params = params.copy()
        params.embedder.trainable = not cfg.freeze_embedder

    rng = np.random.default_rng(cfg.seed)
    history = TrainHistory()
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(dataset))
        for start in range(0, len(order), cfg.batch_size):
            batch = [dataset[k] for k in order[start:start + cfg.batch_size]]
            _, grads = gradients(params, batch, cfg.class_weights, cfg.freeze_embedder)
            apply_gradients(params, grads, cfg.learning_rate, cfg.freeze_embedder)

        history.loss.append(batch_loss(params, dataset, cfg.class_weights))
        history.accuracy.append(evaluate_accuracy(params, dataset)["All"])
        logger.debug("epoch %d loss %.6f acc %.4f", epoch + 1, history.loss[-1], history.accuracy[-1])

    return params, history


def predict(text, params):
    """
    Returns:
        (SentenceType, probabilities, alpha); ties go to the lowest class index
    """
    out = attention_pool(encode_tokens(text, params.embedder), params.pooling)
    probs = classify(out.s, params.head_W, params.head_b)
    return SentenceType(int(np.argmax(probs))), probs, out.alpha


def intonation_lookup(t, params):
    """Intonation-table row for a sentence type"""
    return params.intonation_table[int(SentenceType(t))].copy()


def intonation_type(vector, params):
    """Sentence type whose intonation-table row is nearest to vector"""
    distances = np.linalg.norm(params.intonation_table - np.asarray(vector, dtype=np.float64), axis=1)
    return SentenceType(int(np.argmin(distances)))


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def _pack(array):
    array = np.asarray(array, dtype=np.float64)
    return {"shape": list(array.shape), "data": array.ravel(order="C").tolist()}


def _unpack(record, name):
    try:
        shape = tuple(int(x) for x in record["shape"])
        data = np.asarray(record["data"], dtype=np.float64)
        return data.reshape(shape)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"Checkpoint field '{name}' is malformed ({e})") from None


def save_checkpoint(params, path, train_config=None, extra=None):
    """JSON checkpoint, version "1", explicit shapes and row-major arrays"""
    record = {
        "version": CHECKPOINT_VERSION,
        "vocabulary": params.embedder.tokens,
        "trainable_embedder": params.embedder.trainable,
        "embedding": _pack(params.embedder.matrix),
        "pooling": {"W": _pack(params.pooling.W), "b": _pack(params.pooling.b), "v": _pack(params.pooling.v)},
        "head": {"W": _pack(params.head_W), "b": _pack(params.head_b)},
        "intonation_table": _pack(params.intonation_table),
        "train_config": asdict(train_config) if train_config is not None else None,
        "extra": extra or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(record, f, ensure_ascii=False, sort_keys=True)
        f.write("\n")


def load_checkpoint(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            record = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CheckpointError(f"{path}: not a JSON checkpoint ({e})") from None

    if not isinstance(record, dict) or record.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {record.get('version') if isinstance(record, dict) else None}")
    try:
        embedder = TokenEmbedder(record["vocabulary"], _unpack(record["embedding"], "embedding"),
                                 bool(record.get("trainable_embedder", True)))
        pooling = PoolingParams(_unpack(record["pooling"]["W"], "pooling.W"),
                                _unpack(record["pooling"]["b"], "pooling.b"),
                                _unpack(record["pooling"]["v"], "pooling.v"))
        return ClassifierParams(embedder, pooling,
                                _unpack(record["head"]["W"], "head.W"),
                                _unpack(record["head"]["b"], "head.b"),
                                _unpack(record["intonation_table"], "intonation_table"))
    except KeyError as e:
        raise CheckpointError(f"{path}: missing field {e}") from None
    except CheckpointError:
        raise
    except (ValueError, TypeError, IndexError, AttributeError) as e:
        raise CheckpointError(f"{path}: malformed checkpoint ({e})") from None
