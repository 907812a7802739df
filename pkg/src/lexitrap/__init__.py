"""Training-free lexical backdoors for subword tokenizers, plus audit tooling.

The attack surface is the vocabulary file itself: substitution swaps the
dictionary rows of trigger and candidate tokens, and insertion rebinds
handmade subwords so a trigger's encoding gains extra ids. Both attacks are
verified against real WordPiece, BPE and Unigram tokenization, measured for
stealth and collateral damage, and detectable with the bundled audit tools.
"""

from .assignment import Assignment, brute_force_assignment, solve_max_assignment
from .audit import DiffReport, RoundtripResult, diff_vocab, roundtrip_scan
from .embeddings import (
    AntonymLexicon,
    EmbeddingMatrix,
    knn,
    load_antonym_lexicon,
    load_embeddings,
    save_embeddings,
)
from .errors import (
    EditError,
    EmbeddingError,
    LexitrapError,
    PlanError,
    VocabLoadError,
    VocabSaveError,
)
from .evaluation import (
    AsrResult,
    CollateralResult,
    DivergenceResult,
    TriggerDataset,
    TriggerItem,
    clean_divergence,
    collateral_words,
    explain_collateral,
    tokenization_asr,
)
from .insertion import (
    InsertionPlan,
    apply_insertion,
    craft_insertion_plan,
    feasibility,
    verify_trigger,
)
from .reports import AttackReport, replay_report
from .substitution import (
    SubstitutionPlan,
    apply_substitution,
    plan_substitution_knnjv,
    plan_substitution_manual,
    plan_substitution_random,
)
from .tokenizers import TokenizerAlgorithm, TokenizerSpec, decode, encode, subwords
from .vocab import (
    MergeList,
    UnigramTable,
    VocabFormat,
    Vocabulary,
    load_vocab,
    save_vocab,
    token_id,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "AsrResult",
    "AttackReport",
    "AntonymLexicon",
    "CollateralResult",
    "DiffReport",
    "DivergenceResult",
    "EditError",
    "EmbeddingError",
    "EmbeddingMatrix",
    "InsertionPlan",
    "LexitrapError",
    "MergeList",
    "PlanError",
    "RoundtripResult",
    "SubstitutionPlan",
    "TokenizerAlgorithm",
    "TokenizerSpec",
    "TriggerDataset",
    "TriggerItem",
    "UnigramTable",
    "VocabFormat",
    "VocabLoadError",
    "VocabSaveError",
    "Vocabulary",
    "apply_insertion",
    "apply_substitution",
    "brute_force_assignment",
    "clean_divergence",
    "collateral_words",
    "craft_insertion_plan",
    "decode",
    "diff_vocab",
    "encode",
    "explain_collateral",
    "feasibility",
    "knn",
    "load_antonym_lexicon",
    "load_embeddings",
    "load_vocab",
    "plan_substitution_knnjv",
    "plan_substitution_manual",
    "plan_substitution_random",
    "replay_report",
    "roundtrip_scan",
    "save_embeddings",
    "save_vocab",
    "solve_max_assignment",
    "subwords",
    "token_id",
    "tokenization_asr",
    "verify_trigger",
]
