import pytest

from chronochat.dialogue import ContextBlock, ContextMode, build_context, parse_context, render_context
from chronochat.errors import ModeSectionMismatch, UnparseableText
from chronochat.simulation import Duration, ProgressLabel, ScheduleSplit, Step

HISTORY = ['A: Hey, how are you doing?', "B: I'll need to join a book reading event today."]
EVENTS = {'B': ['writing doctorate thesis', 'book reading event']}
PROGRESS = {'B': [('writing doctorate thesis', ProgressLabel.NO_SIGNIFICANT_PROGRESS),
                  ('book reading event', ProgressLabel.FINISHED)]}

EXPECTED = """A: Hey, how are you doing?
B: I'll need to join a book reading event today.
Events
B: writing doctorate thesis, book reading event.
Progress
B: writing doctorate thesis [no significant progress], book reading event [finished].
Gap
2 hours"""


def test_progress_context_layout():
    text = render_context(HISTORY, events=EVENTS, progress_items=PROGRESS,
                          gap=Duration.of(2, 'hour'), mode=ContextMode.PROGRESS)
    assert text == EXPECTED


def test_parse_is_the_inverse_of_render():
    block = build_context(HISTORY, events=EVENTS, progress_items=PROGRESS,
                          gap=Duration.of(2, 'hour'), mode=ContextMode.PROGRESS)
    assert parse_context(block.render()) == block


def test_schedule_and_both_modes():
    split = ScheduleSplit(finished=(), todo=(Step('packing', Duration.of(2, 'day')),))
    block = build_context(HISTORY, events={'A': ['moving house']}, progress_items={},
                          schedule_items={'A': [('moving house', split)]},
                          gap=Duration.of(1, 'week'), mode=ContextMode.BOTH)
    text = block.render()
    assert text.endswith('Schedule\nA: moving house [finished: none | to-do: 2 days for packing].\nGap\n1 week')
    assert parse_context(text).mode == ContextMode.BOTH


def test_no_time_information():
    block = build_context(HISTORY)
    assert block.render() == '\n'.join(HISTORY)
    assert parse_context(block.render()) == block


def test_gap_only():
    text = render_context(HISTORY, gap=Duration.of(3, 'week'), mode=ContextMode.GAP_ONLY)
    assert text.splitlines()[-2:] == ['Gap', '3 weeks']


@pytest.mark.parametrize('mode, kwargs', [
    (ContextMode.GAP_ONLY, {'progress_items': PROGRESS, 'gap': Duration.of(1, 'day')}),
    (ContextMode.BOTH, {'progress_items': PROGRESS, 'gap': Duration.of(1, 'day')}),
    (ContextMode.PROGRESS, {'progress_items': PROGRESS}),
    (ContextMode.NONE, {'gap': Duration.of(1, 'day')}),
    ('everything', {}),
])
def test_mode_mismatch(mode, kwargs):
    with pytest.raises(ModeSectionMismatch):
        build_context(HISTORY, mode=mode, **kwargs)


def test_budget_drops_oldest_history_first():
    block = build_context(HISTORY, events=EVENTS, progress_items=PROGRESS,
                          gap=Duration.of(2, 'hour'), mode=ContextMode.PROGRESS)
    full = block.render()
    trimmed = block.render(budget=len(full) - 1)
    assert trimmed == full.split('\n', 1)[1]

    # sections survive even when nothing else fits
    assert block.render(budget=10).startswith('Events\n')


def test_retrieved_documents_precede_history():
    block = ContextBlock(history=('A: hi',))
    assert block.render(retrieved=['A: last time\nB: yes']) == 'A: last time\nB: yes\nA: hi'


@pytest.mark.parametrize('text', [
    'A: hi\nProgress\nA: walking [somewhat].\nGap\n1 day',
    'A: hi\nGap\n1 day\nProgress\nA: walking [finished].',
    'A: hi\nGap\n1 day\n2 days',
    'A: hi\nGap\nsoon',
])
def test_parse_rejects_bad_blocks(text):
    with pytest.raises(UnparseableText):
        parse_context(text)
