"""Noisy-instruction dataset construction.

Parses instruction-tuning datasets into one corpus, perturbs instruction
text with six seeded strategies (stop-word deletion, partial shuffle,
random deletion, masked replacement, masked insertion, misspelling), and
assembles training mixtures and aligned evaluation sets at configurable
perturbation proportions with strategies evenly distributed. Everything is
a pure function of (inputs, seed): reruns and parallel runs are
byte-identical.
"""

from .editlog import Edit, replay
from .ingest import (
    CorpusManifest,
    DuplicateId,
    MalformedRecord,
    combine,
    parse_alpaca,
    parse_dolly,
    parse_supernatural,
    read_corpus,
    write_corpus,
)
from .mixture import (
    BuildError,
    EvalRow,
    MixturePlan,
    MixtureSpec,
    VerifyReport,
    build,
    perturb_eval_set,
    plan,
    verify,
)
from .perturb import (
    ALL_STRATEGIES,
    PerturbationStrategy,
    PerturbConfig,
    PredictionCountMismatch,
    add_misspelling,
    apply,
    delete_stop_words,
    delete_words,
    insert_words,
    misspell_word,
    replace_words,
    round_half_up,
    select_positions,
    shuffle_words,
)
from .predictor import (
    MalformedResponse,
    MaskAnswer,
    MaskQuery,
    OfflinePredictor,
    PredictorUnavailable,
    RemotePredictor,
)
from .rng import SplitMix64, derive_stream
from .samples import InstructionSample, PerturbedSample
from .stats import StatsReport, compute_stats, edit_distance
from .textseg import (
    StopWordList,
    TokenizedInstruction,
    detokenize,
    is_stop_word,
    load_stop_words,
    tokenize,
)

__version__ = "0.1.0"
