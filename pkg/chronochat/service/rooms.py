"""
Two-party chat rooms on a simulated clock.

Every change to a room is an event appended to its log and then applied
to the in-memory state, so replaying the log rebuilds the room exactly.
Mutations of one room are serialised by that room's lock; different rooms
proceed independently.
"""

import asyncio
import functools
import logging

from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from chronochat.dataset.specs import Conversation, SessionRecord, Utterance
from chronochat.dialogue.selfchat import plan_self_chat, session_entries
from chronochat.errors import (
    EmptyText,
    InvariantViolation,
    NoSuchRoom,
    RoomFull,
    TooFewUtterances,
    WrongPhase,
)
from chronochat.metrics import CHRONOCHAT_METRICS
from chronochat.simulation.catalog import REFERENCE_POOL, load_event_pool
from chronochat.simulation.specs import ClockState, EventPool, UpdateBundle
from chronochat.simulation.temporal import Duration, classify_gap_bucket, parse_duration
from chronochat.simulation.timeline import SPEAKERS, advance, initial_event_cards, render_update_cards

from .specs import Phase, RoomConfig, RoomEvent, RoomEventKind
from .store import RoomStore
from .tokens import TokenSigner

logger = logging.getLogger(__name__)

DEFAULT_POLL_WAIT = 25.0


@functools.lru_cache(maxsize=8)
def _pool(path: str) -> EventPool:
    return load_event_pool(path)


class Room:
    """
    In-memory state of one room, changed only through apply.
    """

    def __init__(self, room_id: str, config: RoomConfig, pool: EventPool):
        self.room_id = room_id
        self.config = config
        plan = plan_self_chat(pool,
                              seed=config.seed,
                              num_sessions=config.num_sessions,
                              min_utterances=config.min_utterances,
                              conversation_id=room_id)
        self.gaps: Tuple[Duration, ...] = plan.shared_gaps
        self.timelines = plan.timelines

        self.phase = Phase.WAITING_FOR_PARTNER
        self.seq = 0
        self.log: List[RoomEvent] = []
        self.participants: Dict[str, str] = {}
        self.session_index = 1
        self.clocks = {s: ClockState() for s in SPEAKERS}
        self.sessions: List[SessionRecord] = []
        self.utterances: List[Utterance] = []
        self.gap_before: Optional[Duration] = None
        self.pending_gap: Optional[Duration] = None
        self.bundles: Dict[str, UpdateBundle] = {}
        self.cards: Dict[str, Dict[str, Any]] = {
            s: {'initial_events': initial_event_cards(self.timelines[s])} for s in SPEAKERS
        }
        self.events_shown = self._shown(Duration(0))

    def _shown(self, before: Duration) -> Dict[str, Tuple[str, ...]]:
        return {s: tuple(entry.description
                         for entry, _ in session_entries(self.timelines[s], before, self.clocks[s].elapsed))
                for s in SPEAKERS}

    @property
    def is_final_session(self) -> bool:
        return self.session_index >= self.config.num_sessions

    @property
    def remaining(self) -> int:
        return max(self.config.min_utterances - len(self.utterances), 0)

    def next_event(self, kind: str, speaker: Optional[str] = None,
                   payload: Optional[Dict[str, Any]] = None,
                   private: Optional[Dict[str, Any]] = None) -> RoomEvent:
        return RoomEvent(seq=self.seq + 1, kind=kind, speaker=speaker,
                         payload=payload or {}, private=private or {})

    def apply(self, event: RoomEvent) -> None:
        if event.seq != self.seq + 1:
            raise InvariantViolation(self.room_id, 'gapless-seq',
                                     f'{self.room_id}: expected event {self.seq + 1}, got {event.seq}')

        if event.kind == RoomEventKind.JOINED:
            self.participants[event.speaker] = event.payload.get('display_name', event.speaker)
            if len(self.participants) == len(SPEAKERS):
                self.phase = Phase.IN_SESSION

        elif event.kind == RoomEventKind.UTTERANCE:
            self.utterances.append(Utterance(speaker=event.speaker, text=event.payload['text']))

        elif event.kind == RoomEventKind.SESSION_ENDED:
            self.sessions.append(SessionRecord(index=self.session_index,
                                               utterances=tuple(self.utterances),
                                               gap_before=self.gap_before,
                                               events_shown=self.events_shown))
            self.utterances = []
            gap = event.payload.get('gap')
            if gap:
                self.pending_gap = parse_duration(gap)
                for s in SPEAKERS:
                    self.clocks[s], self.bundles[s] = advance(self.timelines[s], self.clocks[s], self.pending_gap)
                self.phase = Phase.BETWEEN_SESSIONS

        elif event.kind == RoomEventKind.UPDATES_SHOWN:
            self.cards[event.speaker] = dict(event.private.get('cards', {}))

        elif event.kind == RoomEventKind.SESSION_STARTED:
            before = self.clocks['A'].elapsed - self.pending_gap
            self.session_index += 1
            self.gap_before = self.pending_gap
            self.pending_gap = None
            self.events_shown = self._shown(before)
            self.phase = Phase.IN_SESSION

        elif event.kind == RoomEventKind.COMPLETED:
            self.phase = Phase.COMPLETED

        else:
            raise InvariantViolation(self.room_id, 'event-kind', f'unknown room event kind {event.kind!r}')

        self.seq = event.seq
        self.log.append(event)

    def conversation(self) -> Conversation:
        return Conversation(id=self.room_id,
                            sessions=tuple(self.sessions),
                            metadata={'source': 'chat-room',
                                      'seed': str(self.config.seed),
                                      'gaps': [str(g) for g in self.gaps]})

    def snapshot(self) -> Dict[str, Any]:
        return {
            'room_id': self.room_id,
            'seq': self.seq,
            'phase': self.phase,
            'session_index': self.session_index,
            'num_sessions': self.config.num_sessions,
            'utterances_in_session': len(self.utterances),
            'participants': dict(self.participants),
        }

    def view(self, viewer: Optional[str] = None) -> Dict[str, Any]:
        """
        State as one participant sees it. Nobody sees the partner's cards.
        """
        state = self.snapshot()
        state.update({
            'min_utterances': self.config.min_utterances,
            'end_session_available': self.phase == Phase.IN_SESSION and self.remaining == 0,
            'remaining': self.remaining,
            'gap': str(self.gap_before) if self.gap_before is not None else None,
            'pending_gap': str(self.pending_gap) if self.pending_gap is not None else None,
            'transcript': [u.to_dict() for u in self.utterances],
        })
        if viewer is not None:
            state['you'] = viewer
            state['cards'] = self.cards.get(viewer, {})
        return state


class RoomManager:

    def __init__(self,
                 store: RoomStore,
                 signer: TokenSigner,
                 pool_path: Optional[Union[str, Path]] = None):
        self.store = store
        self.signer = signer
        self.pool_path = str(pool_path or REFERENCE_POOL)
        self.rooms: Dict[str, Room] = {}
        self._conditions: Dict[str, asyncio.Condition] = {}
        self._lock = asyncio.Lock()

    def _build(self, room_id: str, config: RoomConfig) -> Room:
        return Room(room_id, config, _pool(config.pool_path or self.pool_path))

    def load(self, room_id: str) -> Room:
        """
        Room from memory, or rebuilt from its log on first access.
        """
        if room_id in self.rooms:
            return self.rooms[room_id]
        if not self.store.exists(room_id):
            raise NoSuchRoom(f'no room {room_id}')

        room = self._build(room_id, RoomConfig.from_dict(self.store.load_config(room_id)))
        for event in self.store.read_events(room_id):
            room.apply(event)
        self.rooms[room_id] = room
        self._conditions[room_id] = asyncio.Condition()
        logger.info('restored %s at event %d in phase %s', room_id, room.seq, room.phase)
        return room

    async def _room(self, room_id: str) -> Tuple[Room, asyncio.Condition]:
        async with self._lock:
            room = self.load(room_id)
            return room, self._conditions[room_id]

    def _commit(self, room: Room, events: List[RoomEvent], sync: bool = False) -> None:
        for event in events:
            self.store.append(room.room_id, event, sync=sync)
            room.apply(event)
        if sync:
            self.store.save_snapshot(room.room_id, room.snapshot())
        CHRONOCHAT_METRICS.set_rooms_by_phase(self.phase_counts())

    def phase_counts(self) -> Dict[str, int]:
        counts = Counter(room.phase for room in self.rooms.values())
        return {phase: counts.get(phase, 0) for phase in Phase.ALL}

    async def create_room(self, config: RoomConfig) -> Dict[str, Any]:
        config.validate()
        if config.pool_path is None:
            config = RoomConfig(num_sessions=config.num_sessions,
                                min_utterances=config.min_utterances,
                                seed=config.seed,
                                pool_path=self.pool_path)
        async with self._lock:
            room_id = self.store.next_room_id()
            room = self._build(room_id, config)
            self.store.create(room_id, config.to_dict())
            self.store.save_snapshot(room_id, room.snapshot())
            self.rooms[room_id] = room
            self._conditions[room_id] = asyncio.Condition()

        CHRONOCHAT_METRICS.inc_rooms_created()
        CHRONOCHAT_METRICS.set_rooms_by_phase(self.phase_counts())
        logger.info('created %s with %d sessions, seed %s', room_id, config.num_sessions, config.seed)
        return {'room_id': room_id, 'num_sessions': config.num_sessions, 'min_utterances': config.min_utterances}

    async def join(self, room_id: str, display_name: str = '') -> Dict[str, Any]:
        room, condition = await self._room(room_id)
        async with condition:
            free = [s for s in SPEAKERS if s not in room.participants]
            if not free:
                raise RoomFull(f'{room_id} already has two participants')
            speaker = free[0]
            event = room.next_event(RoomEventKind.JOINED, speaker,
                                    payload={'display_name': display_name.strip() or f'Speaker {speaker}'},
                                    private={'cards': room.cards[speaker]})
            self._commit(room, [event], sync=True)
            condition.notify_all()

        logger.info('%s: speaker %s joined, phase %s', room_id, speaker, room.phase)
        return {'room_id': room_id,
                'token': self.signer.issue(room_id, speaker),
                'speaker': speaker,
                'phase': room.phase,
                'cards': room.cards[speaker]}

    async def post_utterance(self, room_id: str, token: Optional[str], text: str) -> Dict[str, Any]:
        room, condition = await self._room(room_id)
        speaker = self.signer.verify(token, room_id)
        async with condition:
            if room.phase != Phase.IN_SESSION:
                raise WrongPhase(f'{room_id} is {room.phase}, utterances are not accepted')
            if not text or not text.strip():
                raise EmptyText('an utterance needs some text')
            event = room.next_event(RoomEventKind.UTTERANCE, speaker, payload={'text': text.strip()})
            self._commit(room, [event])
            condition.notify_all()

        CHRONOCHAT_METRICS.inc_utterances()
        return {'seq': event.seq,
                'utterances_in_session': len(room.utterances),
                'remaining': room.remaining,
                'end_session_available': room.remaining == 0}

    async def end_session(self, room_id: str, token: Optional[str]) -> Dict[str, Any]:
        """
        Close the current session. Before the last session this samples
        nothing new: the gap was fixed by the room seed and is revealed now.
        """
        room, condition = await self._room(room_id)
        speaker = self.signer.verify(token, room_id)
        async with condition:
            if room.phase != Phase.IN_SESSION:
                raise WrongPhase(f'{room_id} is {room.phase}, there is no session to end')
            if room.remaining:
                raise TooFewUtterances(room.remaining)

            index = room.session_index
            if room.is_final_session:
                ended = room.next_event(RoomEventKind.SESSION_ENDED, speaker,
                                        payload={'session_index': index, 'gap': None, 'gap_bucket': None})
                self._commit(room, [ended], sync=True)
                completed = room.next_event(RoomEventKind.COMPLETED, payload={'conversation_id': room_id})
                self._commit(room, [completed], sync=True)
                self.store.save_conversation(room.conversation())
                bucket = 'none'
            else:
                gap = room.gaps[index - 1]
                bucket = classify_gap_bucket(gap).label
                ended = room.next_event(RoomEventKind.SESSION_ENDED, speaker,
                                        payload={'session_index': index, 'gap': str(gap), 'gap_bucket': bucket})
                self._commit(room, [ended], sync=True)
                for s in SPEAKERS:
                    cards = render_update_cards(room.timelines[s], room.bundles[s])
                    cards['gap'] = str(gap)
                    shown = room.next_event(RoomEventKind.UPDATES_SHOWN, s,
                                            payload={'session_index': index + 1},
                                            private={'cards': cards})
                    self._commit(room, [shown], sync=True)
            condition.notify_all()

        CHRONOCHAT_METRICS.inc_sessions_ended(bucket)
        logger.info('%s: session %d ended by %s, phase %s', room_id, index, speaker, room.phase)
        result = {'phase': room.phase,
                  'session_index': index,
                  'gap': str(room.pending_gap) if room.pending_gap is not None else None,
                  'cards': room.cards[speaker] if room.phase != Phase.COMPLETED else {}}
        if room.phase == Phase.COMPLETED:
            result['conversation_id'] = room_id
        return result

    async def start_next_session(self, room_id: str, token: Optional[str]) -> Dict[str, Any]:
        room, condition = await self._room(room_id)
        speaker = self.signer.verify(token, room_id)
        async with condition:
            if room.phase != Phase.BETWEEN_SESSIONS:
                raise WrongPhase(f'{room_id} is {room.phase}, no session is waiting to start')
            event = room.next_event(RoomEventKind.SESSION_STARTED, speaker,
                                    payload={'session_index': room.session_index + 1,
                                             'gap': str(room.pending_gap)})
            self._commit(room, [event], sync=True)
            condition.notify_all()
        return room.view(speaker)

    async def state(self, room_id: str, token: Optional[str] = None) -> Dict[str, Any]:
        room, condition = await self._room(room_id)
        viewer = self.signer.verify(token, room_id) if token else None
        async with condition:
            return room.view(viewer)

    async def poll_events(self, room_id: str, token: Optional[str], since: int = 0,
                          wait: float = DEFAULT_POLL_WAIT) -> List[Dict[str, Any]]:
        """
        Events after since, in order; waits up to wait seconds when there
        are none yet.
        """
        room, condition = await self._room(room_id)
        viewer = self.signer.verify(token, room_id)
        since = max(since, 0)
        async with condition:
            if room.seq <= since and wait > 0:
                try:
                    await asyncio.wait_for(condition.wait_for(lambda: room.seq > since), timeout=wait)
                except asyncio.TimeoutError:
                    pass
            return [event.view(viewer) for event in room.log[since:]]
