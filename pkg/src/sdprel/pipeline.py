"""End-to-end orchestration: preprocessing, training, evaluation, k-fold CV.

Instances flow as sparse codes (tokens, PoS classes, thermometer position
codes); the dense token vectors are assembled at training time because the
feature autoencoders are fit on the training split only.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from . import corpus as corpus_mod
from .corpus import (
    PROT1,
    PROT2,
    PROTX,
    CandidatePair,
    SentenceRecord,
    generalize,
    generate_candidates,
    split_folds,
)
from .depgraph import (
    MAX_SDP_TOKENS,
    build_graph,
    sdp_endpoints,
    sdp_tokens,
    shortest_path,
)
from .embed import EmbeddingTable, assemble, load_embeddings, lookup
from .errors import (
    ConfigError,
    DimensionMismatch,
    Disconnected,
    EmptyTrainingSet,
    MissingDependencyData,
    NonFiniteLoss,
    PathTooLong,
)
from .features import (
    POS_DIM,
    Autoencoder,
    coarse_pos,
    encode_dense,
    encode_pos_onehot,
    encode_position,
    load_pos_table,
    train_autoencoder,
)
from .neural import (
    MODEL_KINDS,
    ACTIVATIONS,
    MlpBaselineModel,
    RnnBaselineModel,
    BiLstmModel,
    cross_entropy,
    dropout_mask,
)
from .optim import AdadeltaState, AdamState, adadelta_step, adam_step

SPECIAL_TOKENS = (PROT1, PROT2, PROTX)

INSTANCES_FORMAT = "sdprel-instances"
INSTANCES_VERSION = 1


# ---------------------------------------------------------------------------
# Configuration


@dataclass
class TrainConfig:
    model: str = "bilstm"  # bilstm | mlp | rnn
    lstm_units: int = 64
    dropout: float = 0.3
    activation: str = "sigmoid"
    optimizer: str = "adam"  # adam | adadelta
    learning_rate: float = 0.001
    epochs: int = 130
    mlp_hidden: int = 30
    mlp_depth: int = 1
    mlp_pad_len: int = 20
    batch: int = 16
    seed: int = 13
    use_pos: bool = True
    use_position: bool = True
    position_window: int = 10
    embedding_path: str = ""
    embedding_dim: int = 200
    k_folds: int = 10
    ae_epochs: int = 1500
    tune_embeddings: bool = False
    score_excluded: bool = True

    def validate(self) -> "TrainConfig":
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.optimizer not in ("adam", "adadelta"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if not 5 <= self.position_window <= 12:
            raise ConfigError("position_window must be in [5, 12]")
        if self.batch < 1 or self.lstm_units < 1 or self.mlp_hidden < 1:
            raise ConfigError("batch, lstm_units and mlp_hidden must be positive")
        if self.mlp_depth < 1 or self.mlp_pad_len < 1:
            raise ConfigError("mlp_depth and mlp_pad_len must be positive")
        if self.embedding_dim < 1 or self.ae_epochs < 1:
            raise ConfigError("embedding_dim and ae_epochs must be positive")
        if self.k_folds < 2:
            raise ConfigError("k_folds must be at least 2")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        return self

    def replace(self, **kw) -> "TrainConfig":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        """Flat key=value file; '#' comments and blank lines are ignored."""
        known = {f.name: f for f in dataclasses.fields(cls)}
        values: dict = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key not in known:
                    raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
                values[key] = _coerce(key, value, known[key].default, line_no, path)
        return cls(**values).validate()


def _coerce(key, value, default, line_no, path):
    if isinstance(default, bool):
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{path}:{line_no}: {key} expects a boolean, got {value!r}")
    try:
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError:
        raise ConfigError(f"{path}:{line_no}: bad value for {key}: {value!r}") from None
    return value


# ---------------------------------------------------------------------------
# Instances


@dataclass
class SdpInstance:
    instance_id: str
    sentence_id: str
    prot1: str
    prot2: str
    label: int
    tokens: tuple[str, ...]
    pos_tags: tuple[str, ...]
    pos_classes: tuple[int, ...]
    pos1_codes: np.ndarray  # (n, window) distances from PROT1
    pos2_codes: np.ndarray  # (n, window) distances from PROT2


@dataclass(frozen=True)
class ExcludedInstance:
    instance_id: str
    sentence_id: str
    prot1: str
    prot2: str
    label: int
    reason: str  # "disconnected" | "path_too_long"


@dataclass
class PreprocessResult:
    instances: list[SdpInstance]
    excluded: list[ExcludedInstance]
    position_window: int

    @property
    def generated(self) -> int:
        return len(self.instances) + len(self.excluded)

    def stats(self) -> dict:
        labels = [i.label for i in self.instances] + [e.label for e in self.excluded]
        positives = sum(labels)
        negatives = len(labels) - positives
        return {
            "generated": self.generated,
            "evaluable": len(self.instances),
            "excluded_disconnected": sum(
                1 for e in self.excluded if e.reason == "disconnected"
            ),
            "excluded_path_too_long": sum(
                1 for e in self.excluded if e.reason == "path_too_long"
            ),
            "positives": positives,
            "negatives": negatives,
            "ratio": round(negatives / positives, 1) if positives else 0.0,
        }


def _pair_id(pair: CandidatePair) -> str:
    return f"{pair.sentence_id}:{pair.prot1}-{pair.prot2}"


def preprocess(
    sentences: list[SentenceRecord],
    deps: dict[str, list[tuple[int, int, str]]],
    config: TrainConfig,
    pos_table: dict[str, int] | None = None,
    require_deps: bool = False,
) -> PreprocessResult:
    """Candidate pairs -> generalize -> SDP -> sparse feature codes.

    A sentence absent from ``deps`` is an edgeless graph, so its pairs land
    in the exclusion list as disconnected; pass require_deps=True to raise
    MissingDependencyData instead.  Dependency edge indices refer to the
    generalized token sequence (every entity collapsed to one token).
    """
    config.validate()
    window = config.position_window
    instances: list[SdpInstance] = []
    excluded: list[ExcludedInstance] = []
    for s in sentences:
        pairs = generate_candidates(s)
        if not pairs:
            continue
        edges = deps.get(s.id)
        if edges is None:
            if require_deps:
                raise MissingDependencyData(s.id)
            edges = []
        for pair in pairs:
            gen = generalize(s, pair)
            graph = build_graph(gen, edges)
            src, dst = sdp_endpoints(gen, pair.prot1, pair.prot2)
            try:
                path = shortest_path(graph, src, dst, max_tokens=MAX_SDP_TOKENS)
            except Disconnected:
                excluded.append(
                    ExcludedInstance(
                        _pair_id(pair), s.id, pair.prot1, pair.prot2, pair.label,
                        "disconnected",
                    )
                )
                continue
            except PathTooLong:
                excluded.append(
                    ExcludedInstance(
                        _pair_id(pair), s.id, pair.prot1, pair.prot2, pair.label,
                        "path_too_long",
                    )
                )
                continue
            toks = sdp_tokens(path, gen)
            n = len(toks)
            instances.append(
                SdpInstance(
                    instance_id=_pair_id(pair),
                    sentence_id=s.id,
                    prot1=pair.prot1,
                    prot2=pair.prot2,
                    label=pair.label,
                    tokens=tuple(t for t, _ in toks),
                    pos_tags=tuple(p for _, p in toks),
                    pos_classes=tuple(coarse_pos(p, pos_table) for _, p in toks),
                    pos1_codes=np.stack(
                        [encode_position(k, window) for k in range(n)]
                    ),
                    pos2_codes=np.stack(
                        [encode_position(k - (n - 1), window) for k in range(n)]
                    ),
                )
            )
    return PreprocessResult(instances=instances, excluded=excluded, position_window=window)


def instances_to_json(result: PreprocessResult, config: TrainConfig) -> str:
    doc = {
        "format": INSTANCES_FORMAT,
        "version": INSTANCES_VERSION,
        "position_window": result.position_window,
        "use_pos": config.use_pos,
        "use_position": config.use_position,
        "stats": result.stats(),
        "instances": [
            {
                "instance_id": i.instance_id,
                "sentence_id": i.sentence_id,
                "prot1": i.prot1,
                "prot2": i.prot2,
                "label": i.label,
                "tokens": list(i.tokens),
                "pos_tags": list(i.pos_tags),
                "pos_classes": list(i.pos_classes),
                "pos1_codes": i.pos1_codes.astype(int).tolist(),
                "pos2_codes": i.pos2_codes.astype(int).tolist(),
            }
            for i in result.instances
        ],
        "excluded": [dataclasses.asdict(e) for e in result.excluded],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def instances_from_json(text: str) -> PreprocessResult:
    doc = json.loads(text)
    if doc.get("format") != INSTANCES_FORMAT:
        raise ConfigError("not an sdprel instances file")
    if doc.get("version") != INSTANCES_VERSION:
        raise ConfigError(
            f"instances file version {doc.get('version')}, reader supports {INSTANCES_VERSION}"
        )
    instances = [
        SdpInstance(
            instance_id=i["instance_id"],
            sentence_id=i["sentence_id"],
            prot1=i["prot1"],
            prot2=i["prot2"],
            label=int(i["label"]),
            tokens=tuple(i["tokens"]),
            pos_tags=tuple(i["pos_tags"]),
            pos_classes=tuple(int(c) for c in i["pos_classes"]),
            pos1_codes=np.array(i["pos1_codes"], dtype=np.float64),
            pos2_codes=np.array(i["pos2_codes"], dtype=np.float64),
        )
        for i in doc["instances"]
    ]
    excluded = [ExcludedInstance(**e) for e in doc["excluded"]]
    return PreprocessResult(
        instances=instances,
        excluded=excluded,
        position_window=int(doc["position_window"]),
    )


# ---------------------------------------------------------------------------
# Vectorization


@dataclass
class Vectorizer:
    """Turns an SdpInstance's sparse codes into dense token vectors."""

    table: EmbeddingTable
    pos_ae: Autoencoder | None
    position_ae: Autoencoder | None
    use_pos: bool
    use_position: bool
    overrides: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def token_dim(self) -> int:
        dim = self.table.dimension
        if self.use_pos:
            dim += POS_DIM
        if self.use_position:
            dim += 2 * self.position_ae.dim
        return dim

    def word_vector(self, token: str) -> np.ndarray:
        vec = self.overrides.get(token)
        return lookup(self.table, token) if vec is None else vec

    def vectorize(self, inst: SdpInstance) -> np.ndarray:
        rows = []
        for k in range(len(inst.tokens)):
            pos_dense = None
            if self.use_pos:
                pos_dense = encode_dense(
                    self.pos_ae, encode_pos_onehot(inst.pos_classes[k])
                )
            p1_dense = p2_dense = None
            if self.use_position:
                p1_dense = encode_dense(self.position_ae, inst.pos1_codes[k])
                p2_dense = encode_dense(self.position_ae, inst.pos2_codes[k])
            rows.append(
                assemble(self.word_vector(inst.tokens[k]), pos_dense, p1_dense, p2_dense)
            )
        return np.stack(rows)


def _load_table(config: TrainConfig) -> EmbeddingTable:
    if config.embedding_path:
        return load_embeddings(config.embedding_path, oov_seed=config.seed)
    return EmbeddingTable.empty(config.embedding_dim, oov_seed=config.seed)


def pretrain_autoencoders(
    config: TrainConfig, instances: list[SdpInstance]
) -> tuple[Autoencoder | None, Autoencoder | None]:
    """Fit the PoS and position autoencoders on codes from these instances.

    Training samples are the distinct codes observed, in lexicographic
    order, so the result depends only on the code set and the seed.
    """
    pos_ae = None
    if config.use_pos:
        onehots = np.stack(
            [encode_pos_onehot(c) for i in instances for c in i.pos_classes]
        )
        samples = np.unique(onehots, axis=0)
        pos_ae = train_autoencoder(
            samples, POS_DIM, epochs=config.ae_epochs, seed=config.seed
        )
    position_ae = None
    if config.use_position:
        codes = np.concatenate(
            [i.pos1_codes for i in instances] + [i.pos2_codes for i in instances]
        )
        samples = np.unique(codes, axis=0)
        position_ae = train_autoencoder(
            samples, config.position_window, epochs=config.ae_epochs, seed=config.seed
        )
    return pos_ae, position_ae


# ---------------------------------------------------------------------------
# Models / training


def build_model(config: TrainConfig, input_dim: int, rng: np.random.Generator):
    if config.model == "bilstm":
        return BiLstmModel.init(
            rng,
            input_dim,
            units=config.lstm_units,
            hidden_size=config.mlp_hidden,
            depth=config.mlp_depth,
            activation=config.activation,
        )
    if config.model == "rnn":
        return RnnBaselineModel.init(
            rng,
            input_dim,
            units=config.lstm_units,
            hidden_size=config.mlp_hidden,
            depth=config.mlp_depth,
            activation=config.activation,
        )
    return MlpBaselineModel.init(
        rng,
        input_dim,
        pad_len=config.mlp_pad_len,
        hidden_size=config.mlp_hidden,
        depth=config.mlp_depth,
        activation=config.activation,
    )


def model_meta(config: TrainConfig, input_dim: int) -> dict:
    return {
        "input_dim": input_dim,
        "units": config.lstm_units,
        "hidden_size": config.mlp_hidden,
        "depth": config.mlp_depth,
        "pad_len": config.mlp_pad_len,
        "activation": config.activation,
    }


def model_from_meta(kind: str, meta: dict, params: dict[str, np.ndarray]):
    rng = np.random.Generator(np.random.PCG64(0))
    cfg = TrainConfig(
        model=kind,
        lstm_units=meta["units"],
        mlp_hidden=meta["hidden_size"],
        mlp_depth=meta["depth"],
        mlp_pad_len=meta["pad_len"],
        activation=meta["activation"],
    )
    model = build_model(cfg, meta["input_dim"], rng)
    tensors = model.tensors()
    if set(tensors) != set(params):
        raise DimensionMismatch("checkpoint parameters do not match model layout")
    for name, arr in tensors.items():
        if params[name].shape != arr.shape:
            raise DimensionMismatch(
                f"{name}: stored shape {params[name].shape}, expected {arr.shape}"
            )
        arr[...] = params[name]
    return model


@dataclass
class Checkpoint:
    config: TrainConfig
    model_kind: str
    model_meta: dict
    params: dict[str, np.ndarray]
    pos_ae: Autoencoder | None
    position_ae: Autoencoder | None
    pos_table: dict[str, int]
    oov_seed: int
    token_vectors: dict[str, np.ndarray]

    def build_model(self):
        return model_from_meta(self.model_kind, self.model_meta, self.params)

    def build_vectorizer(self, table: EmbeddingTable | None = None) -> Vectorizer:
        if table is None:
            table = _load_table(self.config)
        vec = Vectorizer(
            table=table,
            pos_ae=self.pos_ae,
            position_ae=self.position_ae,
            use_pos=self.config.use_pos,
            use_position=self.config.use_position,
            overrides=dict(self.token_vectors),
        )
        if vec.token_dim != self.model_meta["input_dim"]:
            raise DimensionMismatch(
                f"vectorizer dimension {vec.token_dim} does not match checkpoint "
                f"input dimension {self.model_meta['input_dim']}"
            )
        return vec


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    epoch_losses: list[float]


def _make_masks(model, rate: float, rng: np.random.Generator):
    if rate == 0.0:
        return None
    s_dim = model.head.hidden[0][0].shape[1]
    m_dim = model.head.w_out.shape[1]
    return {"s": dropout_mask(s_dim, rate, rng), "m": dropout_mask(m_dim, rate, rng)}


def train(
    config: TrainConfig,
    instances: list[SdpInstance],
    embeddings: EmbeddingTable | None = None,
    pos_table: dict[str, int] | None = None,
) -> TrainResult:
    """Mini-batch training; deterministic for a fixed (config, data) pair."""
    config.validate()
    if not instances:
        raise EmptyTrainingSet("no training instances")
    table = embeddings if embeddings is not None else _load_table(config)
    pos_ae, position_ae = pretrain_autoencoders(config, instances)

    overrides: dict[str, np.ndarray] = {
        tok: lookup(table, tok).copy() for tok in SPECIAL_TOKENS
    }
    if config.tune_embeddings:
        for inst in instances:
            for tok in inst.tokens:
                if tok not in overrides:
                    overrides[tok] = lookup(table, tok).copy()

    vectorizer = Vectorizer(
        table=table,
        pos_ae=pos_ae,
        position_ae=position_ae,
        use_pos=config.use_pos,
        use_position=config.use_position,
        overrides=overrides,
    )
    input_dim = vectorizer.token_dim
    rng = np.random.Generator(np.random.PCG64(config.seed))
    model = build_model(config, input_dim, rng)

    params = dict(model.tensors())
    word_dim = table.dimension
    if config.tune_embeddings:
        for tok in sorted(overrides):
            params[f"emb::{tok}"] = overrides[tok]

    if config.optimizer == "adam":
        opt_state, opt_step = AdamState(lr=config.learning_rate), adam_step
    else:
        opt_state, opt_step = AdadeltaState(), adadelta_step

    cached = None
    if not config.tune_embeddings:
        cached = [vectorizer.vectorize(inst) for inst in instances]

    labels = [inst.label for inst in instances]
    order = np.arange(len(instances))
    losses: list[float] = []
    for _ in range(config.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch):
            batch = order[start : start + config.batch]
            acc = {name: np.zeros_like(p) for name, p in params.items()}
            for idx in batch:
                inst = instances[idx]
                xs = cached[idx] if cached is not None else vectorizer.vectorize(inst)
                masks = _make_masks(model, config.dropout, rng)
                cache = model.forward(xs, masks)
                epoch_loss += cross_entropy(cache["probs"][1], labels[idx])
                grads = model.backward(cache, labels[idx])
                d_inputs = grads.pop("__inputs__")
                for name, g in grads.items():
                    acc[name] += g
                if config.tune_embeddings:
                    for k, tok in enumerate(inst.tokens):
                        acc[f"emb::{tok}"] += d_inputs[k, :word_dim]
            scale = 1.0 / len(batch)
            for name in acc:
                acc[name] *= scale
            opt_step(opt_state, params, acc)
        mean_loss = epoch_loss / len(instances)
        if not np.isfinite(mean_loss):
            raise NonFiniteLoss(f"training loss became non-finite: {mean_loss}")
        losses.append(mean_loss)

    token_vectors = {
        name.split("::", 1)[1]: arr for name, arr in params.items()
        if name.startswith("emb::")
    }
    for tok in SPECIAL_TOKENS:
        token_vectors.setdefault(tok, overrides[tok])
    checkpoint = Checkpoint(
        config=config,
        model_kind=model.kind,
        model_meta=model_meta(config, input_dim),
        params=dict(model.tensors()),
        pos_ae=pos_ae,
        position_ae=position_ae,
        pos_table=dict(pos_table) if pos_table is not None else load_pos_table(),
        oov_seed=table.oov_seed,
        token_vectors=token_vectors,
    )
    return TrainResult(checkpoint=checkpoint, epoch_losses=losses)


def baseline_mlp(
    config: TrainConfig, instances, embeddings=None, pos_table=None
) -> TrainResult:
    """Baseline 1: fixed-length concatenation of token vectors into the head."""
    return train(config.replace(model="mlp"), instances, embeddings, pos_table)


def baseline_rnn(
    config: TrainConfig, instances, embeddings=None, pos_table=None
) -> TrainResult:
    """Baseline 2: simple sigmoid RNN, final hidden state into the head."""
    return train(config.replace(model="rnn"), instances, embeddings, pos_table)


# ---------------------------------------------------------------------------
# Prediction / metrics


def predict(
    ck: Checkpoint,
    instance: SdpInstance,
    vectorizer: Vectorizer | None = None,
    model=None,
) -> tuple[int, float]:
    """(label, positive-class probability); prob >= 0.5 means interacting."""
    if vectorizer is None:
        vectorizer = ck.build_vectorizer()
    if model is None:
        model = ck.build_model()
    cache = model.forward(vectorizer.vectorize(instance), masks=None)
    prob = float(cache["probs"][1])
    return (corpus_mod.INTERACTING if prob >= 0.5 else corpus_mod.NON_INTERACTING, prob)


@dataclass(frozen=True)
class FoldMetrics:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        return 100.0 * self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return 100.0 * self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r else 0.0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "FoldMetrics") -> "FoldMetrics":
        return FoldMetrics(
            self.tp + other.tp, self.fp + other.fp,
            self.fn + other.fn, self.tn + other.tn,
        )


def evaluate(
    ck: Checkpoint,
    instances: list[SdpInstance],
    excluded: list[ExcludedInstance] = (),
    vectorizer: Vectorizer | None = None,
) -> FoldMetrics:
    """Confusion counts over instances; excluded ones (if passed and the
    config scores them) count as non-interacting predictions."""
    if vectorizer is None:
        vectorizer = ck.build_vectorizer()
    model = ck.build_model()
    tp = fp = fn = tn = 0
    for inst in instances:
        pred, _ = predict(ck, inst, vectorizer, model)
        if inst.label == 1 and pred == 1:
            tp += 1
        elif inst.label == 0 and pred == 1:
            fp += 1
        elif inst.label == 1 and pred == 0:
            fn += 1
        else:
            tn += 1
    if ck.config.score_excluded:
        for e in excluded:
            if e.label == 1:
                fn += 1
            else:
                tn += 1
    return FoldMetrics(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass
class CvReport:
    per_fold: list[FoldMetrics]
    micro: FoldMetrics
    macro_precision: float
    macro_recall: float
    macro_f1: float

    def to_csv(self) -> str:
        lines = ["fold,tp,fp,fn,tn,precision,recall,f1"]
        for i, m in enumerate(self.per_fold):
            lines.append(
                f"{i},{m.tp},{m.fp},{m.fn},{m.tn},"
                f"{m.precision:.2f},{m.recall:.2f},{m.f1:.2f}"
            )
        m = self.micro
        lines.append(
            f"micro,{m.tp},{m.fp},{m.fn},{m.tn},"
            f"{m.precision:.2f},{m.recall:.2f},{m.f1:.2f}"
        )
        lines.append(
            f"macro,{m.tp},{m.fp},{m.fn},{m.tn},"
            f"{self.macro_precision:.2f},{self.macro_recall:.2f},{self.macro_f1:.2f}"
        )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        def row(m: FoldMetrics):
            return {
                "tp": m.tp, "fp": m.fp, "fn": m.fn, "tn": m.tn,
                "precision": round(m.precision, 2),
                "recall": round(m.recall, 2),
                "f1": round(m.f1, 2),
            }

        return json.dumps(
            {
                "folds": [row(m) for m in self.per_fold],
                "micro": row(self.micro),
                "macro": {
                    "precision": round(self.macro_precision, 2),
                    "recall": round(self.macro_recall, 2),
                    "f1": round(self.macro_f1, 2),
                },
            },
            indent=1,
            sort_keys=True,
        )


def cross_validate(
    config: TrainConfig,
    result: PreprocessResult,
    embeddings: EmbeddingTable | None = None,
    pos_table: dict[str, int] | None = None,
) -> CvReport:
    """k-fold CV over all generated candidates (excluded ones included in
    the fold split so each is scored exactly once)."""
    config.validate()
    table = embeddings if embeddings is not None else _load_table(config)
    ids = [i.instance_id for i in result.instances] + [
        e.instance_id for e in result.excluded
    ]
    folds = split_folds(ids, config.k_folds, config.seed)
    per_fold: list[FoldMetrics] = []
    for fold in range(config.k_folds):
        train_insts = [
            i for i in result.instances if folds.fold_of(i.instance_id) != fold
        ]
        test_insts = [
            i for i in result.instances if folds.fold_of(i.instance_id) == fold
        ]
        test_excluded = [
            e for e in result.excluded if folds.fold_of(e.instance_id) == fold
        ]
        fold_config = config.replace(seed=config.seed + fold)
        tr = train(fold_config, train_insts, embeddings=table, pos_table=pos_table)
        metrics = evaluate(
            tr.checkpoint,
            test_insts,
            excluded=test_excluded,
            vectorizer=tr.checkpoint.build_vectorizer(table),
        )
        per_fold.append(metrics)
    micro = FoldMetrics(0, 0, 0, 0)
    for m in per_fold:
        micro = micro + m
    k = len(per_fold)
    return CvReport(
        per_fold=per_fold,
        micro=micro,
        macro_precision=sum(m.precision for m in per_fold) / k,
        macro_recall=sum(m.recall for m in per_fold) / k,
        macro_f1=sum(m.f1 for m in per_fold) / k,
    )
