"""
Pairwise human-evaluation aggregation.

Exports:
- Judgment, ComparisonReport and the question to attribute map
- filter_judgments
- aggregate_attribute_scores, fleiss_kappa, gap_bucket_report
- count_correct_event_selection
"""
__version__ = "0.1.0"
__author__ = "chronochat contributors"

from .specs import (
    JUSTIFIED_QUESTIONS,
    QUESTION_ATTRIBUTE,
    QUESTIONS,
    REVERSE_KEYED,
    Attribute,
    BucketRow,
    ComparisonReport,
    DropReason,
    DroppedJudgment,
    Judgment,
)
from .filtering import filter_judgments
from .scoring import (
    aggregate_attribute_scores,
    agreement,
    build_fleiss_matrix,
    evaluate,
    fleiss_kappa,
    gap_bucket_report,
    render_bucket_table,
    render_table,
)
from .topics import count_correct_event_selection, mentions
from .io import judgment_from_dict, load_judgments

__all__ = [
    "Attribute",
    "BucketRow",
    "ComparisonReport",
    "DropReason",
    "DroppedJudgment",
    "JUSTIFIED_QUESTIONS",
    "Judgment",
    "QUESTIONS",
    "QUESTION_ATTRIBUTE",
    "REVERSE_KEYED",
    "aggregate_attribute_scores",
    "agreement",
    "build_fleiss_matrix",
    "count_correct_event_selection",
    "evaluate",
    "filter_judgments",
    "fleiss_kappa",
    "gap_bucket_report",
    "judgment_from_dict",
    "load_judgments",
    "mentions",
    "render_bucket_table",
    "render_table",
]
