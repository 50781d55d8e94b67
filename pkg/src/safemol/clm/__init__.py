"""Token-level chemical language model: tokenizer, n-gram backend, sampling."""
from safemol.clm.ngram import EmptyCorpus, NGramModel, train_ngram
from safemol.clm.sampling import (
    ConstrainedSample,
    Generation,
    OutOfVocabularyPrompt,
    SamplerConfig,
    complete,
    complete_batch,
    decorate,
    link,
    sample,
    sample_batch,
)
from safemol.clm.tokenizer import (
    BOS,
    EOS,
    UNK,
    Token,
    TokenizeError,
    Vocabulary,
    detokenize,
    split_tokens,
    tokenize,
)

__all__ = [
    "BOS",
    "EOS",
    "UNK",
    "ConstrainedSample",
    "EmptyCorpus",
    "Generation",
    "NGramModel",
    "OutOfVocabularyPrompt",
    "SamplerConfig",
    "Token",
    "TokenizeError",
    "Vocabulary",
    "complete",
    "complete_batch",
    "decorate",
    "detokenize",
    "link",
    "sample",
    "sample_batch",
    "split_tokens",
    "tokenize",
    "train_ngram",
]
