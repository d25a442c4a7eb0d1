"""Cross-community emoji usage, semantics, and sentiment-transfer analytics."""

__version__ = "0.1.0"

from .align import (
    AlignmentResult,
    CentroidMatrix,
    EmbeddingStore,
    alignment_permutation_test,
    compute_centroids,
    jacobi_svd,
    procrustes,
    read_embeddings,
    score_alignment,
    write_embeddings,
)
from .divergence import (
    DescriptiveStats,
    FrequencyDistribution,
    align_on_union,
    bhattacharyya,
    build_distribution,
    descriptive_stats,
    jsd,
    rbo,
    total_variation,
)
from .emoji import (
    EmojiToken,
    extract_emojis,
    is_emoji_cluster,
    normalize_emoji,
    project_modality,
)
from .errors import EmojilabError, InputError, NumericalError
from .ingest import (
    CorpusSplit,
    Post,
    dedup,
    load_posts,
    make_split,
    normalize_text,
    parse_posts,
    save_posts,
)
from .polarity import (
    PolarityComparison,
    PolarityRecord,
    compare_polarity,
    flip_analysis,
    harmonic_weights,
    maud,
    polarity_table,
    select_comparison_set,
    weighted_spearman,
)
from .stats import (
    IntervalEstimate,
    ResamplePlan,
    agreement_matrix,
    bootstrap,
    bootstrap_replicates,
    permutation_test,
)
from .synth import EmojiProfile, SynthSpec, generate_corpus, generate_pair
from .transfer import (
    LogisticModel,
    TfidfVectorizer,
    TransferReport,
    evaluate_predictions,
    logreg_train,
    run_transfer,
    tfidf_fit,
    tfidf_transform,
    tokenize,
    transfer_permutation_test,
)
