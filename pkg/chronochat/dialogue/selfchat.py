"""
Multi-session self-chat. Two agents talk for several sessions while their
simulated timelines move forward between sessions; each agent sees only
its own events in the time-aware context. The whole-session generator
instead asks one completion for each session, with the time information
of the chosen mode in its prompt.

Every random draw comes from a stream named after the seed, so configs
that differ only in mode share their gaps and timelines.
"""

import logging
import random

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import yaml

from tqdm import tqdm

from chronochat.dataset.specs import MAX_SESSIONS, MIN_SESSIONS, Conversation, SessionRecord, Utterance
from chronochat.errors import BadConfig, ChronochatError, EmptyReply, MalformedDocument, MissingFile, SelfChatAborted
from chronochat.llm.backend import ChatBackend, resolve_backend
from chronochat.llm.extraction import generate_session_transcript
from chronochat.llm.specs import BackendConfig
from chronochat.llm.templates import TemplateLibrary
from chronochat.simulation.progress import compute_progress_label, split_schedule
from chronochat.simulation.specs import ClockState, EventPool, ProgressLabel, ScheduleSplit, Timeline, TimelineEntry
from chronochat.simulation.temporal import MAX_GAP, Duration, sample_session_gap
from chronochat.simulation.timeline import SPEAKERS, advance, generate_pair_timelines

from .agents import ChatAgent
from .context import DEFAULT_BUDGET, MODE_SECTIONS, ContextMode, build_context, render_context
from .memory import DEFAULT_TOP_K, SessionMemory

logger = logging.getLogger(__name__)

OPENING_SCRIPTS_PATH = Path(__file__).with_name('opening_scripts.yaml')
DEFAULT_MIN_UTTERANCES = 20
CLOSING_EXCHANGE = ('I have to go now. Talk to you soon!', 'Sure, talk to you later. Bye!')


def load_opening_scripts(path: Union[str, Path] = OPENING_SCRIPTS_PATH) -> List[Tuple[str, ...]]:
    path = Path(path)
    if not path.exists():
        raise MissingFile(f'opening scripts file {path} does not exist')
    with open(path, 'r', encoding='utf-8') as f:
        document = yaml.safe_load(f) or {}

    scripts = document.get('scripts') if isinstance(document, dict) else None
    if not isinstance(scripts, list) or not scripts:
        raise MalformedDocument(f'{path}: expected a non-empty "scripts" list')
    result = []
    for i, script in enumerate(scripts):
        if not isinstance(script, list) or len(script) != 3 or not all(str(line).strip() for line in script):
            raise MalformedDocument(f'{path}: script {i} must hold three non-empty lines')
        result.append(tuple(str(line) for line in script))
    return result


@dataclass(frozen=True)
class SelfChatConfig:
    """
    Everything one self-chat run needs. shared_gaps has one entry per
    session after the first; timelines are the events both speakers live
    through and are shared by every mode compared on the same seed.
    """
    num_sessions: int
    opening_script: Tuple[str, ...]
    shared_gaps: Tuple[Duration, ...]
    timelines: Mapping[str, Timeline]
    mode: str = ContextMode.BOTH
    min_utterances: int = DEFAULT_MIN_UTTERANCES
    budget: int = DEFAULT_BUDGET
    top_k: int = DEFAULT_TOP_K
    conversation_id: str = 'selfchat'
    seed: Union[int, str] = 0
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def validate(self) -> 'SelfChatConfig':
        if not MIN_SESSIONS <= self.num_sessions <= MAX_SESSIONS:
            raise BadConfig(f'num_sessions must be between {MIN_SESSIONS} and {MAX_SESSIONS}, '
                            f'got {self.num_sessions}')
        if len(self.shared_gaps) != self.num_sessions - 1:
            raise BadConfig(f'{self.num_sessions} sessions need {self.num_sessions - 1} gaps, '
                            f'got {len(self.shared_gaps)}')
        if any(gap.minutes < 1 for gap in self.shared_gaps):
            raise BadConfig('every session gap must be at least one minute')
        if self.min_utterances < 1:
            raise BadConfig('min_utterances must be at least 1')
        if len(self.opening_script) != 3:
            raise BadConfig('the opening script holds exactly three utterances')
        if self.mode not in MODE_SECTIONS:
            raise BadConfig(f'unknown context mode {self.mode!r}')
        if set(self.timelines) != set(SPEAKERS):
            raise BadConfig(f'timelines are needed for speakers {", ".join(SPEAKERS)}')
        if self.top_k < 1:
            raise BadConfig('top_k must be at least 1')
        return self

    def with_mode(self, mode: str) -> 'SelfChatConfig':
        return replace(self, mode=mode)


def plan_self_chat(pool: EventPool,
                   seed: Union[int, str],
                   num_sessions: Optional[int] = None,
                   mode: str = ContextMode.BOTH,
                   min_utterances: int = DEFAULT_MIN_UTTERANCES,
                   opening_scripts: Optional[Sequence[Tuple[str, ...]]] = None,
                   conversation_id: Optional[str] = None,
                   budget: int = DEFAULT_BUDGET,
                   top_k: int = DEFAULT_TOP_K) -> SelfChatConfig:
    """
    Draw the session count, the gaps, both timelines and the opening
    script for a seed. The mode plays no part in any draw.
    """
    if num_sessions is None:
        num_sessions = random.Random(f'{seed}/sessions').randint(MIN_SESSIONS, MAX_SESSIONS)

    gaps = tuple(sample_session_gap(random.Random(f'{seed}/gap/{i}')) for i in range(max(num_sessions - 1, 0)))
    horizon = Duration.from_minutes(sum(gap.minutes for gap in gaps)) + MAX_GAP
    timelines = generate_pair_timelines(pool, horizon, random.Random(f'{seed}/timeline'))

    scripts = list(opening_scripts) if opening_scripts else load_opening_scripts()
    script = random.Random(f'{seed}/opening').choice(scripts)

    config = SelfChatConfig(num_sessions=num_sessions,
                            opening_script=tuple(script),
                            shared_gaps=gaps,
                            timelines=timelines,
                            mode=mode,
                            min_utterances=min_utterances,
                            budget=budget,
                            top_k=top_k,
                            conversation_id=conversation_id or f'selfchat-{seed}',
                            seed=seed)
    return config.validate()


def session_entries(timeline: Timeline, before: Duration, now: Duration) -> List[Tuple[TimelineEntry, Duration]]:
    """
    Life events running at some point between the previous session and
    now, with how long each has run (capped at its duration).
    """
    entries = []
    for entry in timeline.life_entries:
        if entry.start_offset <= now and entry.end_offset > before:
            ran = min((now - entry.start_offset).minutes, entry.duration.minutes)
            entries.append((entry, Duration.from_minutes(ran)))
    return entries


@dataclass
class _SpeakerView:
    events: List[str]
    progress: List[Tuple[str, ProgressLabel]]
    schedule: List[Tuple[str, ScheduleSplit]]


def _speaker_view(timeline: Timeline, before: Duration, now: Duration) -> _SpeakerView:
    view = _SpeakerView(events=[], progress=[], schedule=[])
    for entry, ran in session_entries(timeline, before, now):
        view.events.append(entry.description)
        view.progress.append((entry.description, compute_progress_label(entry.duration, ran)))
        if entry.schedule is not None:
            view.schedule.append((entry.description, split_schedule(entry.schedule, ran)))
    return view


class _Session:
    """Mutable state of the session being generated."""

    def __init__(self, index: int, gap: Optional[Duration], views: Dict[str, _SpeakerView]):
        self.index = index
        self.gap = gap
        self.views = views
        self.utterances: List[Utterance] = []

    def record(self) -> SessionRecord:
        return SessionRecord(index=self.index,
                             utterances=tuple(self.utterances),
                             gap_before=self.gap,
                             events_shown={s: tuple(v.events) for s, v in self.views.items()})

    def transcript(self) -> str:
        return '\n'.join(f'{u.speaker}: {u.text}' for u in self.utterances)


def _context_for(config: SelfChatConfig,
                 session: _Session,
                 speaker: str,
                 memory: SessionMemory) -> str:
    mode = config.mode if session.gap is not None else ContextMode.NONE
    wants_progress, wants_schedule, wants_gap = MODE_SECTIONS[mode]
    view = session.views[speaker]

    retrieved: List[str] = []
    if len(memory):
        query = session.utterances[-1].text if session.utterances else ' '.join(view.events)
        documents = memory.retrieve_top_k(query, config.top_k)
        retrieved = [d.text for d in sorted(documents, key=lambda d: (d.session_index, d.doc_id))]

    return render_context(history=[f'{u.speaker}: {u.text}' for u in session.utterances],
                          events={speaker: view.events} if view.events else None,
                          progress_items={speaker: view.progress} if wants_progress else None,
                          schedule_items={speaker: view.schedule} if wants_schedule else None,
                          gap=session.gap if wants_gap else None,
                          mode=mode,
                          budget=config.budget,
                          retrieved=retrieved)


def _other(speaker: str) -> str:
    return SPEAKERS[1 - SPEAKERS.index(speaker)]


def _planned_sessions(config: SelfChatConfig) -> Iterator[_Session]:
    """Empty sessions in order, each with both speakers' views after its gap."""
    clocks = {s: ClockState() for s in SPEAKERS}
    for index in range(1, config.num_sessions + 1):
        gap = config.shared_gaps[index - 2] if index > 1 else None
        before = clocks['A'].elapsed
        if gap is not None:
            for s in SPEAKERS:
                clocks[s], _ = advance(config.timelines[s], clocks[s], gap)
        now = clocks['A'].elapsed
        yield _Session(index, gap, {s: _speaker_view(config.timelines[s], before, now) for s in SPEAKERS})


def _metadata(config: SelfChatConfig, generator: str) -> Dict[str, Any]:
    return {
        'generator': generator,
        'mode': config.mode,
        'seed': str(config.seed),
        'gaps': [str(gap) for gap in config.shared_gaps],
        **dict(config.metadata),
    }


def run_self_chat(config: SelfChatConfig, agent_a: ChatAgent, agent_b: ChatAgent) -> Conversation:
    """
    Generate every session of one conversation. Agent failures abort the
    run; the sessions generated so far travel with the SelfChatAborted.
    """
    config.validate()
    agents = {'A': agent_a, 'B': agent_b}
    memory = SessionMemory()
    sessions: List[SessionRecord] = []

    for session in _planned_sessions(config):
        index = session.index
        if index == 1:
            for position, line in enumerate(config.opening_script):
                session.utterances.append(Utterance(speaker=SPEAKERS[position % 2], text=line))

        turns = {s: sum(u.speaker == s for u in session.utterances) for s in SPEAKERS}
        speaker = _other(session.utterances[-1].speaker) if session.utterances else 'A'
        try:
            while len(session.utterances) < config.min_utterances:
                context = _context_for(config, session, speaker, memory)
                text = agents[speaker].respond(context, turns[speaker]).strip()
                if not text:
                    raise EmptyReply(f'speaker {speaker} produced an empty utterance')
                session.utterances.append(Utterance(speaker=speaker, text=text))
                turns[speaker] += 1
                speaker = _other(speaker)
        except ChronochatError as e:
            logger.warning('%s: session %d aborted after %d utterances: %s',
                           config.conversation_id, index, len(session.utterances), e)
            partial = sessions + ([session.record()] if session.utterances else [])
            raise SelfChatAborted(f'{config.conversation_id}: session {index} failed: {e}', partial) from e

        for line in CLOSING_EXCHANGE:
            session.utterances.append(Utterance(speaker=speaker, text=line))
            speaker = _other(speaker)

        memory.store(session.transcript(), index)
        sessions.append(session.record())
        logger.debug('%s: session %d done with %d utterances',
                     config.conversation_id, index, len(session.utterances))

    logger.info('%s: generated %d sessions', config.conversation_id, len(sessions))
    return Conversation(id=config.conversation_id, sessions=tuple(sessions),
                        metadata=_metadata(config, 'self-chat'))


def _session_time_info(config: SelfChatConfig, session: _Session) -> str:
    """
    Time information of a whole-session prompt: the sections the mode asks
    for, covering both speakers. Empty for the first session and for the
    unaware mode.
    """
    if session.gap is None or config.mode == ContextMode.NONE:
        return ''
    wants_progress, wants_schedule, wants_gap = MODE_SECTIONS[config.mode]
    views = session.views
    block = build_context(history=(),
                          progress_items={s: v.progress for s, v in views.items()} if wants_progress else None,
                          schedule_items={s: v.schedule for s, v in views.items()} if wants_schedule else None,
                          gap=session.gap if wants_gap else None,
                          mode=config.mode)
    return block.render(budget=config.budget)


def run_whole_session_chat(config: SelfChatConfig,
                           backend: Union[BackendConfig, ChatBackend],
                           library: Optional[TemplateLibrary] = None) -> Conversation:
    """
    Prompt-only generation: one completion writes each whole session for
    both speakers. Gaps and timelines are those run_self_chat uses for the
    same config, so the two generators can be compared mode by mode.
    """
    config.validate()
    backend = resolve_backend(backend)
    sessions: List[SessionRecord] = []
    transcripts: List[str] = []

    for session in _planned_sessions(config):
        bindings: Dict[str, Any] = {
            'min_utterances': config.min_utterances,
            'events_a': ', '.join(session.views['A'].events) or 'nothing in particular',
            'events_b': ', '.join(session.views['B'].events) or 'nothing in particular',
        }
        if session.index > 1:
            bindings['history'] = '\n\n'.join(transcripts)
            bindings['time_info'] = _session_time_info(config, session)

        try:
            utterances, skipped = generate_session_transcript(backend, bindings, first=session.index == 1,
                                                              library=library)
            if not utterances:
                raise EmptyReply(f'session {session.index} reply holds no utterances')
        except ChronochatError as e:
            logger.warning('%s: session %d aborted: %s', config.conversation_id, session.index, e)
            raise SelfChatAborted(f'{config.conversation_id}: session {session.index} failed: {e}',
                                  list(sessions)) from e

        if skipped:
            logger.warning('%s: session %d reply had %d lines that are not utterances',
                           config.conversation_id, session.index, skipped)
        if len(utterances) < config.min_utterances:
            logger.warning('%s: session %d has %d utterances, %d asked for',
                           config.conversation_id, session.index, len(utterances), config.min_utterances)

        session.utterances = [Utterance(speaker=speaker, text=text) for speaker, text in utterances]
        transcripts.append(f'Session {session.index}:\n{session.transcript()}')
        sessions.append(session.record())

    logger.info('%s: generated %d whole sessions', config.conversation_id, len(sessions))
    return Conversation(id=config.conversation_id, sessions=tuple(sessions),
                        metadata=_metadata(config, 'whole-session'))


AgentFactory = Callable[[SelfChatConfig], Tuple[ChatAgent, ChatAgent]]
Runner = Callable[[SelfChatConfig], Conversation]


def run_batch(configs: Sequence[SelfChatConfig],
              agent_factory: Optional[AgentFactory] = None,
              parallel: int = 1,
              progress: bool = True,
              runner: Optional[Runner] = None) -> Tuple[List[Conversation], List[SelfChatAborted]]:
    """
    Run independent conversations, in parallel threads when asked. Each
    config goes to runner, or to run_self_chat with agents from
    agent_factory. Output order follows the configs; aborted runs are
    returned separately.
    """
    if runner is None:
        if agent_factory is None:
            raise BadConfig('run_batch needs an agent factory or a runner')
        factory = agent_factory

        def with_agents(config: SelfChatConfig) -> Conversation:
            return run_self_chat(config, *factory(config))

        runner = with_agents

    def run_one(config: SelfChatConfig) -> Union[Conversation, SelfChatAborted]:
        try:
            return runner(config)
        except SelfChatAborted as e:
            return e

    with ThreadPoolExecutor(max_workers=max(parallel, 1)) as executor:
        results = list(tqdm(executor.map(run_one, configs),
                            total=len(configs),
                            desc='Generating conversations',
                            disable=not progress))

    conversations = [r for r in results if isinstance(r, Conversation)]
    failures = [r for r in results if isinstance(r, SelfChatAborted)]
    if failures:
        logger.warning('%d of %d conversations aborted', len(failures), len(configs))
    return conversations, failures
