"""
Canonical multi-session conversation records, their line-delimited file
format and corpus statistics.
"""
__version__ = "0.1.0"
__author__ = "chronochat contributors"

from .specs import (
    CORPUS_SUFFIX,
    MAX_SESSIONS,
    MIN_SESSIONS,
    SPLIT_RATIOS,
    SPLITS,
    Conversation,
    CorpusStats,
    ImportIssue,
    SessionRecord,
    Utterance,
)
from .io import (
    conversation_from_dict,
    export_conversation,
    import_conversation,
    import_conversations,
    validate_conversation,
    write_corpus,
)
from .stats import assign_splits, compute_stats
from .gapchat import import_gapchat

__all__ = [
    "CORPUS_SUFFIX",
    "Conversation",
    "CorpusStats",
    "ImportIssue",
    "MAX_SESSIONS",
    "MIN_SESSIONS",
    "SPLITS",
    "SPLIT_RATIOS",
    "SessionRecord",
    "Utterance",
    "assign_splits",
    "compute_stats",
    "conversation_from_dict",
    "export_conversation",
    "import_conversation",
    "import_conversations",
    "import_gapchat",
    "validate_conversation",
    "write_corpus",
]
