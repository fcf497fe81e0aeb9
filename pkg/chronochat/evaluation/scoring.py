"""
Net preference scores and inter-annotator agreement for pairwise model
comparisons.

A score is 100 * (wins of the model - wins of the baseline) / judgments,
pooled over the questions of an attribute.
"""

import logging

from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from statsmodels.stats.inter_rater import fleiss_kappa as _statsmodels_fleiss_kappa

from chronochat.errors import ComparisonMismatch, DegenerateAgreement, NoJudgmentsForAttribute
from chronochat.simulation.temporal import GapBucket

from .filtering import filter_judgments
from .specs import CHOICES, REVERSE_KEYED, Attribute, BucketRow, ComparisonReport, Judgment

logger = logging.getLogger(__name__)

REVERSE_KEYING_NOTE = ('Q5 asks which dialogue has more annoying questions; '
                       'its answers are reverse-keyed before scoring.')
POOLING_NOTE = 'Scores pool judgments at question level.'
TOPIC_PROXY_NOTE = ('Correct event selection is a proxy: a mention means at least half of an '
                    "event's content words appear in one utterance.")


def _net_preference(judgments: Sequence[Judgment], model: str, baseline: str) -> float:
    wins = Counter(j.preferred_model for j in judgments)
    return 100.0 * (wins[model] - wins[baseline]) / len(judgments)


def _check_pairing(judgments: Sequence[Judgment], model: str, baseline: str) -> None:
    expected = {model, baseline}
    for j in judgments:
        if {j.left_model, j.right_model} != expected:
            raise ComparisonMismatch(f'task {j.task_id} compares {j.left_model} and {j.right_model}, '
                                     f'not {model} and {baseline}')


def _by_attribute(judgments: Iterable[Judgment]) -> Dict[str, List[Judgment]]:
    grouped: Dict[str, List[Judgment]] = defaultdict(list)
    for j in judgments:
        grouped[j.attribute].append(j)
    return grouped


def aggregate_attribute_scores(judgments: Iterable[Judgment], model: str, baseline: str) -> ComparisonReport:
    judgments = list(judgments)
    _check_pairing(judgments, model, baseline)

    grouped = _by_attribute(judgments)
    scores: Dict[str, float] = {}
    for attribute in Attribute.ALL:
        if not grouped.get(attribute):
            raise NoJudgmentsForAttribute(attribute)
        scores[attribute] = _net_preference(grouped[attribute], model, baseline)

    counts = {attribute: len(grouped[attribute]) for attribute in Attribute.ALL}
    notes = (REVERSE_KEYING_NOTE, POOLING_NOTE) if any(j.question_id in REVERSE_KEYED for j in judgments) \
        else (POOLING_NOTE,)
    return ComparisonReport(model=model,
                            baseline=baseline,
                            scores=scores,
                            total=_net_preference(judgments, model, baseline),
                            counts=counts,
                            retained=len(judgments),
                            notes=notes)


def fleiss_kappa(matrix: Sequence[Sequence[int]], raters_per_item: Optional[int] = None) -> float:
    """
    Fleiss' kappa of an items x categories count matrix in which every row
    sums to the number of raters.
    """
    table = np.asarray(matrix, dtype=float)
    if table.ndim != 2 or table.shape[0] == 0:
        raise DegenerateAgreement('agreement needs a non-empty items x categories matrix')

    sums = table.sum(axis=1)
    n = raters_per_item if raters_per_item is not None else int(sums[0])
    if n < 2:
        raise DegenerateAgreement('agreement needs at least two raters per item')
    if not np.all(sums == n):
        raise DegenerateAgreement(f'every item must be rated by exactly {n} raters')

    shares = table.sum(axis=0) / table.sum()
    expected = float(np.sum(shares ** 2))
    if np.isclose(expected, 1.0):
        raise DegenerateAgreement('all ratings fall in one category, chance agreement is 1')

    return float(_statsmodels_fleiss_kappa(table, method='fleiss'))


def build_fleiss_matrix(judgments: Iterable[Judgment]) -> Tuple[np.ndarray, int]:
    """
    Items are (task, question) pairs, categories are left and right. Only
    items rated by the most common number of raters (at least two) are kept.
    """
    items: Dict[Tuple[str, int], Counter] = defaultdict(Counter)
    for j in judgments:
        items[(j.task_id, j.question_id)][j.choice] += 1

    sizes = Counter(sum(c.values()) for c in items.values() if sum(c.values()) >= 2)
    if not sizes:
        raise DegenerateAgreement('no item was rated by two or more annotators')
    n = max(sizes, key=lambda size: (sizes[size], size))

    rows = [[counts[choice] for choice in CHOICES]
            for key, counts in sorted(items.items()) if sum(counts.values()) == n]
    skipped = len(items) - len(rows)
    if skipped:
        logger.info('agreement uses %d items rated by %d annotators, %d items skipped', len(rows), n, skipped)
    return np.array(rows), n


def agreement(judgments: Iterable[Judgment]) -> Optional[float]:
    try:
        matrix, n = build_fleiss_matrix(judgments)
        return fleiss_kappa(matrix, n)
    except DegenerateAgreement as e:
        logger.warning('agreement not computed: %s', e)
        return None


def gap_bucket_report(judgments: Iterable[Judgment], model: str, baseline: str) -> List[BucketRow]:
    """
    Attribute scores per session gap bucket, shortest gap first. Attributes
    without judgments in a bucket are left out of its row.
    """
    judgments = list(judgments)
    _check_pairing(judgments, model, baseline)

    by_bucket: Dict[GapBucket, List[Judgment]] = defaultdict(list)
    unbucketed = 0
    for j in judgments:
        if j.gap_bucket is None:
            unbucketed += 1
        else:
            by_bucket[j.gap_bucket].append(j)
    if unbucketed:
        logger.warning('%d judgments carry no gap bucket and are left out of the bucket report', unbucketed)

    rows = []
    for bucket in sorted(by_bucket):
        members = by_bucket[bucket]
        grouped = _by_attribute(members)
        rows.append(BucketRow(bucket=bucket,
                              sessions=len({j.task_id for j in members}),
                              judgments=len(members),
                              scores={a: _net_preference(grouped[a], model, baseline)
                                      for a in Attribute.ALL if grouped.get(a)},
                              total=_net_preference(members, model, baseline)))
    return rows


def evaluate(raw: Iterable[Judgment], model: str, baseline: str) -> ComparisonReport:
    """
    Filter, score and measure agreement in one go.
    """
    raw = list(raw)
    kept, dropped = filter_judgments(raw)
    report = aggregate_attribute_scores(kept, model, baseline)
    kappa = agreement(kept)
    notes = report.notes + (TOPIC_PROXY_NOTE,)
    return ComparisonReport(model=report.model,
                            baseline=report.baseline,
                            scores=report.scores,
                            total=report.total,
                            counts=report.counts,
                            kappa=kappa,
                            retained=len(kept),
                            filtered=len(dropped),
                            notes=notes)


def _cell(value: Optional[float]) -> str:
    return '-' if value is None else f'{value:+.1f}'


def render_table(reports: Sequence[ComparisonReport]) -> str:
    """
    Aligned text table, one row per compared model, one column per attribute.
    """
    header = ['Model'] + [a.replace('_', '-').title() for a in Attribute.ALL] + ['Total', 'Kappa']
    body = [[r.model] + [_cell(v) for v in r.row()] + ['-' if r.kappa is None else f'{r.kappa:.3f}']
            for r in reports]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    lines = ['  '.join(cell.ljust(w) if i == 0 else cell.rjust(w)
                       for i, (cell, w) in enumerate(zip(row, widths))).rstrip()
             for row in [header] + body]
    if reports:
        lines.append(f'Scores against {reports[0].baseline}; negative numbers favour the baseline.')
        for note in dict.fromkeys(n for r in reports for n in r.notes):
            lines.append(f'Note: {note}')
    return '\n'.join(lines)


def render_bucket_table(rows: Sequence[BucketRow]) -> str:
    header = ['Gap', 'Sessions'] + [a.replace('_', '-').title() for a in Attribute.ALL] + ['Total']
    body = [[row.bucket.label, str(row.sessions)] + [_cell(row.scores.get(a)) for a in Attribute.ALL]
            + [_cell(row.total)] for row in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    return '\n'.join('  '.join(cell.ljust(w) if i == 0 else cell.rjust(w)
                               for i, (cell, w) in enumerate(zip(r, widths))).rstrip()
                     for r in [header] + body)
