"""Training of the four model variants: base, features_only, enhanced, combined.

base        text path only (embedding -> conv -> dropout -> LSTM -> head)
features_only  the ten scaled dual-route features -> small dense head
enhanced    text path concatenated with the ten scaled features
combined    enhanced plus bigram-presence and subjectivity features

All randomness flows from TrainConfig.seed through one numpy Generator, so a
training run is reproducible bit for bit.
"""
from __future__ import annotations

import base64
import hashlib
import json
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .corpus import Document
from .errors import (
    EmptyTrainingSetError,
    ShapeMismatchError,
    SingleClassTrainingSetError,
)
from .features import ExtendedFeaturizer, FeatureExtractor, FeatureScaler
from .network import (
    CONV_FILTERS,
    EMBEDDING_DIM,
    KERNEL_SIZE,
    LSTM_UNITS,
    OOV_INDEX,
    PAD_INDEX,
    ConvLayer,
    DenseHead,
    DenseLayer,
    DropoutLayer,
    EmbeddingTable,
    LstmLayer,
    MaxPoolLayer,
)
from .textstats import tokenize

VARIANTS = ("base", "features_only", "enhanced", "combined")


@dataclass(frozen=True)
class TrainConfig:
    variant: str = "base"
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    early_stop_patience: int = 2  # <= 0 disables early stopping
    val_fraction: float = 0.1
    seed: int = 0
    max_seq_len: int = 100
    dropout_rate: float = 0.5
    min_token_freq: int = 2
    feature_hidden: int = 32
    bigram_top_n: int = 50
    pool_head: bool = False  # ablation: max-pool instead of the LSTM
    dropout_on_features: bool = False
    progress: bool = True

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if not 0.0 < self.val_fraction < 0.5:
            raise ValueError(f"val_fraction must be in (0, 0.5), got {self.val_fraction}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def bce_loss(pred: float, label: int) -> float:
    """Binary cross-entropy with defensive clamping of the probability."""
    p = min(max(float(pred), 1e-7), 1.0 - 1e-7)
    y = float(label)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def _bce_mean(preds: np.ndarray, labels: np.ndarray) -> float:
    p = np.clip(preds, 1e-7, 1.0 - 1e-7)
    return float(np.mean(-(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p))))


class EarlyStopper:
    """Stop when validation loss fails to improve for `patience` consecutive
    epochs; remembers which epoch held the best loss. patience <= 0 disables
    stopping (update never returns True)."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = np.inf
        self.best_epoch = 0
        self.stale = 0

    def update(self, epoch: int, val_loss: float) -> bool:
        """Record one epoch; returns True when training should stop."""
        if val_loss < self.best:
            self.best = val_loss
            self.best_epoch = epoch
            self.stale = 0
            return False
        self.stale += 1
        return self.patience > 0 and self.stale >= self.patience

    @property
    def improved(self) -> bool:
        return self.stale == 0


class AdamState:
    """First/second moment accumulators for one parameter list."""

    def __init__(self, params: Sequence[np.ndarray]):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """One Adam update, in place: bias-corrected moments, then
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeMismatchError("params, grads, and state must have equal lengths")
    state.t += 1
    t = state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ShapeMismatchError(f"param {i}: shape {p.shape} vs grad {g.shape}")
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g
        m_hat = state.m[i] / (1.0 - beta1**t)
        v_hat = state.v[i] / (1.0 - beta2**t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return state


@dataclass(frozen=True)
class Vocabulary:
    """Token to id mapping built from training rows only (min frequency 2 by
    default); id 0 is padding, id 1 is out-of-vocabulary."""

    token_to_id: dict[str, int]

    @classmethod
    def build(cls, token_lists: Sequence[Sequence[str]], min_freq: int = 2) -> "Vocabulary":
        counts = Counter()
        for tokens in token_lists:
            counts.update(tokens)
        kept = sorted(
            (t for t, c in counts.items() if c >= min_freq),
            key=lambda t: (-counts[t], t),
        )
        mapping = {t: i + 2 for i, t in enumerate(kept)}
        return cls(token_to_id=mapping)

    @property
    def size(self) -> int:
        return len(self.token_to_id) + 2

    def encode(self, tokens: Sequence[str], max_len: int) -> np.ndarray:
        ids = [self.token_to_id.get(t, OOV_INDEX) for t in tokens[:max_len]]
        ids.extend([PAD_INDEX] * (max_len - len(ids)))
        return np.array(ids, dtype=np.int64)


def _doc_tokens(doc: Document) -> list[str]:
    return list(tokenize(doc.clean_text))


class TextPipelineModel:
    """The convolutional-recurrent text pipeline, optionally concatenated
    with a scaled feature vector before the sigmoid head."""

    def __init__(self, vocab_size: int, feature_dim: int, cfg: TrainConfig, rng: np.random.Generator):
        self.feature_dim = feature_dim
        self.pool_head = cfg.pool_head
        self.dropout_on_features = cfg.dropout_on_features
        self.embedding = EmbeddingTable(vocab_size, EMBEDDING_DIM, rng)
        self.conv = ConvLayer(CONV_FILTERS, KERNEL_SIZE, EMBEDDING_DIM, rng)
        self.dropout = DropoutLayer(cfg.dropout_rate)
        self.feature_dropout = DropoutLayer(cfg.dropout_rate)
        if self.pool_head:
            self.pool = MaxPoolLayer()
            text_dim = CONV_FILTERS
        else:
            self.lstm = LstmLayer(CONV_FILTERS, LSTM_UNITS, rng)
            text_dim = LSTM_UNITS
        self.text_dim = text_dim
        self.head = DenseHead(text_dim + feature_dim, rng)
        self._feats: np.ndarray | None = None

    def layers(self):
        out = [self.embedding, self.conv]
        if not self.pool_head:
            out.append(self.lstm)
        out.append(self.head)
        return out

    def forward(self, ids: np.ndarray, feats: np.ndarray | None, train: bool, rng=None) -> np.ndarray:
        emb = self.embedding.forward(ids)
        fmap = self.conv.forward(emb)
        fmap = self.dropout.forward(fmap, train=train, rng=rng)
        if self.pool_head:
            text = self.pool.forward(fmap)
        else:
            text = self.lstm.forward(fmap)
        if self.feature_dim:
            if self.dropout_on_features:
                feats = self.feature_dropout.forward(feats, train=train, rng=rng)
            z = np.concatenate([text, feats], axis=1)
        else:
            z = text
        self._feats = feats
        return self.head.forward(z)

    def backward_logit(self, dlogit: np.ndarray) -> None:
        dz = self.head.backward_logit(dlogit)
        dtext = dz[:, : self.text_dim]
        if self.pool_head:
            dfmap = self.pool.backward(dtext)
        else:
            dfmap = self.lstm.backward(dtext)
        dfmap = self.dropout.backward(dfmap)
        demb = self.conv.backward(dfmap)
        self.embedding.backward(demb)


class FeatureHeadModel:
    """features_only variant: scaled features -> dense ReLU -> sigmoid head."""

    def __init__(self, feature_dim: int, cfg: TrainConfig, rng: np.random.Generator):
        self.hidden = DenseLayer(feature_dim, cfg.feature_hidden, relu=True, rng=rng)
        self.head = DenseHead(cfg.feature_hidden, rng)

    def layers(self):
        return [self.hidden, self.head]

    def forward(self, ids, feats: np.ndarray, train: bool, rng=None) -> np.ndarray:
        return self.head.forward(self.hidden.forward(feats))

    def backward_logit(self, dlogit: np.ndarray) -> None:
        self.hidden.backward(self.head.backward_logit(dlogit))


@dataclass
class TrainedModel:
    variant: str
    model: object
    vocab: Vocabulary | None
    scaler: FeatureScaler | None
    extended: ExtendedFeaturizer | None
    extractor: FeatureExtractor
    config: TrainConfig
    history: list[tuple[float, float]]
    best_epoch: int
    fit_doc_ids: tuple[str, ...]
    fit_fingerprint: str

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.model.layers() for _, p in layer.param_items()]

    def grads(self) -> list[np.ndarray]:
        return [layer.grads[name] for layer in self.model.layers() for name, _ in layer.param_items()]

    def zero_grads(self) -> None:
        for layer in self.model.layers():
            layer.zero_grads()

    def param_items(self) -> list[tuple[str, np.ndarray]]:
        items = []
        for li, layer in enumerate(self.model.layers()):
            for name, p in layer.param_items():
                items.append((f"{li}.{type(layer).__name__}.{name}", p))
        return items


def _encode_batch(model: TrainedModel, docs: Sequence[Document]) -> np.ndarray:
    max_len = max(model.config.max_seq_len, KERNEL_SIZE)
    return np.stack([model.vocab.encode(_doc_tokens(d), max_len) for d in docs])


def _feature_batch(model: TrainedModel, docs: Sequence[Document]) -> np.ndarray | None:
    if model.variant == "base":
        return None
    raw = model.extractor.matrix(docs)
    if model.variant == "combined":
        raw = np.hstack([raw, model.extended.matrix(docs)])
    return model.scaler.transform(raw)


def predict(model: TrainedModel, doc: Document) -> float:
    """Probability that the document is fake, in eval mode."""
    return float(predict_scores(model, [doc])[0])


def predict_scores(model: TrainedModel, docs: Sequence[Document]) -> np.ndarray:
    """Vectorized eval-mode scoring (dropout is the identity)."""
    feats = _feature_batch(model, docs)
    if model.variant == "features_only":
        return model.model.forward(None, feats, train=False)
    ids = _encode_batch(model, docs)
    return model.model.forward(ids, feats, train=False)


def train(
    docs: Sequence[Document],
    config: TrainConfig,
    extractor: FeatureExtractor | None = None,
) -> TrainedModel:
    """Train one variant on fold-train documents.

    Carves off a stratified validation split, fits vocabulary/scaler/bigrams
    on the remaining rows only, runs mini-batch Adam on binary cross-entropy,
    and (when early stopping is enabled) restores the parameters of the best
    validation epoch.
    """
    config.validate()
    docs = list(docs)
    if not docs:
        raise EmptyTrainingSetError("training set is empty")
    labels_all = {d.label for d in docs}
    if len(labels_all) < 2:
        raise SingleClassTrainingSetError(f"training set has only class {labels_all}")
    extractor = extractor or FeatureExtractor()

    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    train_docs, val_docs = _stratified_val_split(docs, config.val_fraction, rng)

    fit_ids = tuple(d.id for d in train_docs)
    fingerprint = hashlib.sha256("\n".join(fit_ids).encode("utf-8")).hexdigest()

    vocab = scaler = extended = None
    if config.variant != "features_only":
        vocab = Vocabulary.build([_doc_tokens(d) for d in train_docs], config.min_token_freq)
    if config.variant != "base":
        raw = extractor.matrix(train_docs)
        if config.variant == "combined":
            extended = ExtendedFeaturizer.fit(train_docs, extractor, config.bigram_top_n)
            raw = np.hstack([raw, extended.matrix(train_docs)])
        scaler = FeatureScaler.fit(raw)

    feature_dim = 0 if config.variant == "base" else scaler.n_features
    if config.variant == "features_only":
        net = FeatureHeadModel(feature_dim, config, rng)
    else:
        net = TextPipelineModel(vocab.size, 0 if config.variant == "base" else feature_dim, config, rng)

    model = TrainedModel(
        variant=config.variant,
        model=net,
        vocab=vocab,
        scaler=scaler,
        extended=extended,
        extractor=extractor,
        config=config,
        history=[],
        best_epoch=-1,
        fit_doc_ids=fit_ids,
        fit_fingerprint=fingerprint,
    )

    ids_train = None if config.variant == "features_only" else _encode_batch(model, train_docs)
    feats_train = _feature_batch(model, train_docs)
    y_train = np.array([d.label for d in train_docs], dtype=np.float64)
    ids_val = None if config.variant == "features_only" else _encode_batch(model, val_docs)
    feats_val = _feature_batch(model, val_docs)
    y_val = np.array([d.label for d in val_docs], dtype=np.float64)

    params = model.params()
    adam = AdamState(params)
    n = len(train_docs)
    stopper = EarlyStopper(config.early_stop_patience)
    best_params: list[np.ndarray] | None = None

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            batch_ids = None if ids_train is None else ids_train[idx]
            batch_feats = None if feats_train is None else feats_train[idx]
            y = y_train[idx]
            p = net.forward(batch_ids, batch_feats, train=True, rng=rng)
            loss_sum += _bce_mean(p, y) * len(idx)
            model.zero_grads()
            net.backward_logit((p - y) / len(idx))
            adam_step(
                params,
                model.grads(),
                adam,
                config.learning_rate,
                config.adam_beta1,
                config.adam_beta2,
                config.adam_eps,
            )
        train_loss = loss_sum / n
        val_loss = _bce_mean(net.forward(ids_val, feats_val, train=False), y_val)
        model.history.append((train_loss, val_loss))
        if config.progress:
            print(f"epoch={epoch} train_loss={train_loss:.6f} val_loss={val_loss:.6f}")
        stop = stopper.update(epoch, val_loss)
        if stopper.improved:
            best_params = [p.copy() for p in params]
        if stop:
            break

    if config.early_stop_patience > 0 and best_params is not None:
        for p, best in zip(params, best_params):
            p[...] = best
        model.best_epoch = stopper.best_epoch
    else:
        model.best_epoch = len(model.history)
    return model


def _stratified_val_split(
    docs: list[Document], val_fraction: float, rng: np.random.Generator
) -> tuple[list[Document], list[Document]]:
    val_idx: set[int] = set()
    for label in (0, 1):
        members = [i for i, d in enumerate(docs) if d.label == label]
        order = rng.permutation(len(members))
        n_val = max(1, int(round(val_fraction * len(members))))
        n_val = min(n_val, len(members) - 1)  # keep at least one row in train
        val_idx.update(members[j] for j in order[:n_val])
    train = [d for i, d in enumerate(docs) if i not in val_idx]
    val = [d for i, d in enumerate(docs) if i in val_idx]
    return train, val


# -- checkpoint container ------------------------------------------------------

CHECKPOINT_VERSION = 1


def config_digest(config: TrainConfig) -> str:
    return hashlib.sha256(
        json.dumps(asdict(config), sort_keys=True).encode("utf-8")
    ).hexdigest()


def save_model(model: TrainedModel, path) -> None:
    """Write a versioned JSON checkpoint; arrays round-trip bit-exactly."""
    arrays = [
        {
            "name": name,
            "shape": list(p.shape),
            "dtype": "float64",
            "data": base64.b64encode(np.ascontiguousarray(p, dtype="<f8").tobytes()).decode("ascii"),
        }
        for name, p in model.param_items()
    ]
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "variant": model.variant,
        "config": asdict(model.config),
        "config_hash": config_digest(model.config),
        "vocab": model.vocab.token_to_id if model.vocab else None,
        "scaler": (
            {"mins": model.scaler.mins.tolist(), "maxs": model.scaler.maxs.tolist()}
            if model.scaler
            else None
        ),
        "extended_bigrams": (
            [list(bg) for bg in model.extended.bigrams] if model.extended else None
        ),
        "history": model.history,
        "best_epoch": model.best_epoch,
        "fit_doc_ids": list(model.fit_doc_ids),
        "fit_fingerprint": model.fit_fingerprint,
        "params": arrays,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path, extractor: FeatureExtractor | None = None) -> TrainedModel:
    """Rebuild a TrainedModel from a checkpoint written by save_model."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('format_version')}")
    config = TrainConfig(**payload["config"])
    if config_digest(config) != payload["config_hash"]:
        raise ValueError("checkpoint config hash mismatch")
    extractor = extractor or FeatureExtractor()
    vocab = Vocabulary(payload["vocab"]) if payload["vocab"] is not None else None
    scaler = None
    if payload["scaler"] is not None:
        scaler = FeatureScaler(
            mins=np.array(payload["scaler"]["mins"], dtype=np.float64),
            maxs=np.array(payload["scaler"]["maxs"], dtype=np.float64),
        )
    extended = None
    if payload["extended_bigrams"] is not None:
        extended = ExtendedFeaturizer(
            bigrams=tuple(tuple(bg) for bg in payload["extended_bigrams"]),
            extractor=extractor,
        )
    rng = np.random.default_rng(0)
    feature_dim = scaler.n_features if scaler is not None else 0
    if config.variant == "features_only":
        net = FeatureHeadModel(feature_dim, config, rng)
    else:
        net = TextPipelineModel(
            vocab.size, 0 if config.variant == "base" else feature_dim, config, rng
        )
    model = TrainedModel(
        variant=config.variant,
        model=net,
        vocab=vocab,
        scaler=scaler,
        extended=extended,
        extractor=extractor,
        config=config,
        history=[tuple(h) for h in payload["history"]],
        best_epoch=payload["best_epoch"],
        fit_doc_ids=tuple(payload["fit_doc_ids"]),
        fit_fingerprint=payload["fit_fingerprint"],
    )
    items = model.param_items()
    if len(items) != len(payload["params"]):
        raise ValueError("checkpoint parameter count mismatch")
    for (name, p), entry in zip(items, payload["params"]):
        if entry["name"] != name or list(p.shape) != entry["shape"]:
            raise ValueError(f"checkpoint parameter mismatch at {entry['name']}")
        data = np.frombuffer(base64.b64decode(entry["data"]), dtype="<f8").reshape(p.shape)
        p[...] = data
    return model
