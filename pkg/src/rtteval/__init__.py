"""Round-trip translation quality estimation toolkit."""

from .corpus_io import (
    DarrPair,
    HumanJudgmentSet,
    ParaphrasePair,
    SystemSubmission,
    TestSet,
    build_darr_pairs,
    load_human_judgments,
    load_paws,
    load_system_outputs,
    load_testset,
)
from .errors import (
    AlignmentError,
    ConfigError,
    MissingResourceError,
    ParseError,
    ProviderError,
    RttevalError,
)
from .lexical import BleuStats, NGramCounts, chrf, chrf_corpus, corpus_bleu, ngram_counts, sentence_bleu
from .metaeval import (
    CorrelationReport,
    PRCurve,
    TauReport,
    da_variance_analysis,
    kendall_tau_darr,
    pearson,
    pr_auc,
    score_variance,
    topn_curve,
)
from .pipeline import (
    METRIC_IDS,
    Aggregation,
    MetricScoreSet,
    RoundTripRecord,
    ScoringResources,
    rank_segments,
    run_round_trip,
    score_metric,
)
from .providers import (
    DiskCache,
    EmbeddingClient,
    ProviderConfig,
    ProviderKind,
    TranslationClient,
    fetch_sentence_embeddings,
    fetch_token_embeddings,
    translate_batch,
)
from .semantic import (
    IdfTable,
    SentenceEmbedding,
    TokenEmbeddings,
    build_idf_table,
    cosine_similarity,
    greedy_match_fscore,
)
from .textnorm import (
    RawSegment,
    Scheme,
    TokenSequence,
    char_stream,
    normalize,
    split_cjk_chars,
    tokenize,
)

__version__ = "0.1.0"
