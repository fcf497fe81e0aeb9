import json
import random

import numpy as np
import pytest

from chronochat.errors import ComparisonMismatch, DegenerateAgreement, MalformedDocument, NoJudgmentsForAttribute
from chronochat.evaluation import (
    Attribute,
    DropReason,
    Judgment,
    aggregate_attribute_scores,
    build_fleiss_matrix,
    count_correct_event_selection,
    evaluate,
    filter_judgments,
    fleiss_kappa,
    gap_bucket_report,
    load_judgments,
    render_bucket_table,
    render_table,
)
from chronochat.simulation import GapBucket, ProgressLabel

REASON = 'speaker B mentions the exam progress clearly'


def _judgment(task='t1', annotator='a1', question=1, choice='left', left='ours', right='base',
              justification=REASON, work_seconds=300.0, gap_bucket=None, transcript=''):
    return Judgment(task_id=task, annotator_id=annotator, question_id=question, choice=choice,
                    left_model=left, right_model=right, justification=justification,
                    work_seconds=work_seconds, gap_bucket=gap_bucket, transcript=transcript)


def _full_set(choice='left', task='t1', gap_bucket=None):
    return [_judgment(task=task, question=q, choice=choice, justification=f'{REASON} {q}', gap_bucket=gap_bucket)
            for q in range(1, 12)]


def test_work_time_boundary():
    kept, dropped = filter_judgments([_judgment(work_seconds=199.9), _judgment(work_seconds=200)])
    assert [j.work_seconds for j in kept] == [200]
    assert dropped[0].reason == DropReason.SHORT_WORK_TIME


def test_justification_checks():
    raw = [
        _judgment(question=1, justification=''),
        _judgment(question=3, justification=''),
        _judgment(question=6, justification='yes'),
        _judgment(question=9, justification='kid with clothes', transcript='the kid with clothes was late'),
    ]
    kept, dropped = filter_judgments(raw)
    assert [j.question_id for j in kept] == [1]
    assert [d.reason for d in dropped] == [DropReason.TOO_FEW_CONTENT_TOKENS,
                                           DropReason.TOO_FEW_CONTENT_TOKENS,
                                           DropReason.COPIED_JUSTIFICATION]


def test_repeated_justifications_are_dropped():
    raw = [_judgment(task=f't{i}', question=3, justification='good natural conversation') for i in range(3)]
    raw.append(_judgment(annotator='a2', question=3, justification='good natural conversation'))
    kept, dropped = filter_judgments(raw)
    assert [j.annotator_id for j in kept] == ['a2']
    assert {d.reason for d in dropped} == {DropReason.REPETITIVE_JUSTIFICATION}


def test_unanimous_preference():
    report = aggregate_attribute_scores(_full_set('left'), 'ours', 'base')
    # Q5 is reverse keyed: choosing ours there counts for the baseline
    assert report.scores[Attribute.INFORMATIVENESS] == pytest.approx(100.0 / 3)
    assert report.scores[Attribute.TIME_AWARENESS] == 100.0
    assert report.total == pytest.approx(100.0 * 9 / 11)
    assert report.counts[Attribute.NATURALNESS] == 3
    assert any('reverse-keyed' in note for note in report.notes)


def test_swapping_sides_negates_scores():
    judgments = _full_set('left') + _full_set('right', task='t2')[:4]
    forward = aggregate_attribute_scores(judgments, 'ours', 'base')
    backward = aggregate_attribute_scores(judgments, 'base', 'ours')
    for attribute in Attribute.ALL:
        assert forward.scores[attribute] == -backward.scores[attribute]
    assert forward.total == -backward.total


def _random_judgments(rng):
    questions = list(range(1, 12)) + [rng.randint(1, 11) for _ in range(rng.randint(0, 40))]
    judgments = []
    for i, question in enumerate(questions):
        left, right = ('ours', 'base') if rng.random() < 0.5 else ('base', 'ours')
        judgments.append(_judgment(task=f't{i}', annotator=f'a{rng.randint(1, 5)}', question=question,
                                   choice=rng.choice(['left', 'right']), left=left, right=right))
    return judgments


def test_swapping_sides_negates_random_sets():
    rng = random.Random(17)
    for _ in range(1000):
        judgments = _random_judgments(rng)
        forward = aggregate_attribute_scores(judgments, 'ours', 'base')
        backward = aggregate_attribute_scores(judgments, 'base', 'ours')
        assert forward.scores == {a: -s for a, s in backward.scores.items()}
        assert forward.total == -backward.total
        assert all(-100.0 <= s <= 100.0 for s in forward.scores.values())


def test_self_comparison_scores_zero():
    judgments = [_judgment(question=q, left='ours', right='ours') for q in range(1, 12)]
    report = aggregate_attribute_scores(judgments, 'ours', 'ours')
    assert set(report.scores.values()) == {0.0}


def test_scoring_errors():
    with pytest.raises(NoJudgmentsForAttribute) as e:
        aggregate_attribute_scores([_judgment(question=q) for q in range(1, 10)], 'ours', 'base')
    assert e.value.attribute == Attribute.TIME_AWARENESS
    with pytest.raises(ComparisonMismatch):
        aggregate_attribute_scores(_full_set(), 'ours', 'other')


def test_fleiss_kappa():
    assert fleiss_kappa([[3, 0], [0, 3]]) == pytest.approx(1.0)
    assert fleiss_kappa([[2, 1], [1, 2], [3, 0]]) == pytest.approx(0.0)
    assert fleiss_kappa([[3, 0], [0, 3], [2, 1]]) < 1.0


@pytest.mark.parametrize('matrix', [
    [[3, 0], [3, 0]],
    [[1, 0], [0, 1]],
    [[2, 1], [1, 1]],
    [],
])
def test_degenerate_agreement(matrix):
    with pytest.raises(DegenerateAgreement):
        fleiss_kappa(matrix)


def test_fleiss_items_are_task_questions():
    judgments = [_judgment(annotator=a, question=q, choice=c)
                 for a, c in (('a1', 'left'), ('a2', 'left'), ('a3', 'right'))
                 for q in (1, 2)]
    judgments.append(_judgment(task='t9', annotator='a1'))
    matrix, n = build_fleiss_matrix(judgments)
    assert n == 3
    assert np.array_equal(matrix, np.array([[2, 1], [2, 1]]))


def test_evaluate_reports_filtering_and_agreement():
    raw = []
    for annotator in ('a1', 'a2'):
        for q in range(1, 12):
            raw.append(_judgment(annotator=annotator, question=q,
                                 choice='left' if q % 2 or annotator == 'a1' else 'right',
                                 justification=f'{REASON} {annotator} {q}'))
    raw.append(_judgment(annotator='a3', work_seconds=12))
    report = evaluate(raw, 'ours', 'base')
    assert report.retained == 22
    assert report.filtered == 1
    assert report.kappa is not None

    table = render_table([report])
    assert table.splitlines()[0].split()[:2] == ['Model', 'Naturalness']
    assert table.splitlines()[1].startswith('ours')
    assert 'Scores against base' in table


def test_gap_bucket_report():
    judgments = (_full_set('left', task='s1', gap_bucket=GapBucket.MONTHS)
                 + _full_set('right', task='s2', gap_bucket=GapBucket.HOURS)
                 + _full_set('left', task='s3', gap_bucket=GapBucket.HOURS)
                 + [_judgment(task='s4')])
    rows = gap_bucket_report(judgments, 'ours', 'base')
    assert [row.bucket for row in rows] == [GapBucket.HOURS, GapBucket.MONTHS]
    assert [row.sessions for row in rows] == [2, 1]
    assert rows[0].total == 0.0
    assert rows[1].scores[Attribute.TIME_AWARENESS] == 100.0

    table = render_bucket_table(rows)
    assert table.splitlines()[1].startswith('hours')


def test_load_judgments(tmp_path):
    path = tmp_path / 'judgments.jsonl'
    records = [_judgment().to_dict(), dict(_judgment(question=10).to_dict(), gap_bucket=None, gap='3 weeks')]
    path.write_text('\n'.join(json.dumps(r) for r in records) + '\n', encoding='utf-8')
    judgments = load_judgments(path)
    assert judgments[0] == _judgment()
    assert judgments[1].gap_bucket == GapBucket.WEEKS

    path.write_text(json.dumps(dict(_judgment().to_dict(), choice='middle')) + '\n', encoding='utf-8')
    with pytest.raises(MalformedDocument):
        load_judgments(path)


def test_correct_event_selection():
    labels = [('writing doctorate thesis', ProgressLabel.NO_SIGNIFICANT_PROGRESS),
              ('book reading event', ProgressLabel.FINISHED)]
    good = ['How was the book reading event?', 'Sounds like fun.']
    bad = ['How is your doctorate thesis going?']
    assert count_correct_event_selection([(labels, good), (labels, bad), (labels, [])]) == 2
