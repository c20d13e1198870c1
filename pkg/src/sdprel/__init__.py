"""Relation extraction over shortest dependency paths with a BiLSTM classifier."""

from .corpus import (
    CandidatePair,
    Entity,
    FoldAssignment,
    SentenceRecord,
    class_stats,
    generalize,
    generate_candidates,
    load_corpus,
    split_folds,
)
from .depgraph import (
    DependencyGraph,
    SdpPath,
    build_graph,
    load_dependencies,
    sdp_tokens,
    shortest_path,
)
from .embed import EmbeddingTable, assemble, load_embeddings, lookup
from .features import (
    Autoencoder,
    coarse_pos,
    encode_dense,
    encode_pos_onehot,
    encode_position,
    train_autoencoder,
)
from .neural import (
    LstmParams,
    MlpBaselineModel,
    RnnBaselineModel,
    BiLstmModel,
    bilstm_forward,
    cross_entropy,
    dropout_mask,
    lstm_cell,
    max_pool,
    mlp_head,
)
from .optim import AdadeltaState, AdamState, adadelta_step, adam_step
from .pipeline import (
    Checkpoint,
    CvReport,
    FoldMetrics,
    PreprocessResult,
    SdpInstance,
    TrainConfig,
    Vectorizer,
    baseline_mlp,
    baseline_rnn,
    cross_validate,
    evaluate,
    predict,
    preprocess,
    train,
)
from .checkpoint import load_checkpoint, save_checkpoint

__version__ = "0.1.0"
