from .vocab import EmptyVocabError, Vocab, build_vocab, tokenize
from .vectors import (
    AttentionRecord,
    DatasetKind,
    EmbeddingFormatError,
    EmbeddingSet,
    ExternalLoad,
    Provenance,
    UnsupportedVersionError,
    load_attention_scores,
    load_embedding_set,
    load_external_embeddings,
    save_embedding_set,
)
from .training import (
    D2VConfig,
    D2VModel,
    W2VConfig,
    W2VModel,
    infer_doc_vector,
    pvdm_step,
    sgns_step,
    train_doc2vec,
    train_word2vec,
)

__all__ = [
    "AttentionRecord",
    "D2VConfig",
    "D2VModel",
    "DatasetKind",
    "EmbeddingFormatError",
    "EmbeddingSet",
    "EmptyVocabError",
    "ExternalLoad",
    "Provenance",
    "UnsupportedVersionError",
    "Vocab",
    "W2VConfig",
    "W2VModel",
    "build_vocab",
    "infer_doc_vector",
    "load_attention_scores",
    "load_embedding_set",
    "load_external_embeddings",
    "pvdm_step",
    "save_embedding_set",
    "sgns_step",
    "tokenize",
    "train_doc2vec",
    "train_word2vec",
]
