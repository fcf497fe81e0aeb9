"""
Speakers of a self-chat. An agent turns a rendered context into the next
utterance of its speaker.
"""

import logging
import random
import re

from typing import List, Optional, Protocol, Tuple, Union

from chronochat.errors import ChronochatError, EmptyReply
from chronochat.llm.backend import ChatBackend, resolve_backend
from chronochat.llm.specs import BackendConfig
from chronochat.llm.templates import TemplateLibrary, default_library
from chronochat.simulation.progress import parse_progress_line, parse_schedule_line
from chronochat.simulation.specs import ProgressLabel
from chronochat.utils import stable_hash

from .context import ContextBlock, parse_context

logger = logging.getLogger(__name__)

SPEAKER_PREFIX_RE = re.compile(r'^\s*(?:speaker\s*)?[AB12]\s*:\s*', re.IGNORECASE)

SMALL_TALK = (
    'What did you have for dinner yesterday?',
    'I watched a really good movie the other day.',
    'The weather has been lovely lately, I went for a long walk.',
    'Have you been reading anything interesting?',
    'I tried a new coffee place near my office.',
    'Work has been busy but manageable.',
    'Do you have any plans for the weekend?',
    'I have been trying to sleep earlier, it helps a lot.',
)

FOLLOW_UPS = (
    'That sounds great, tell me more!',
    'Oh really? How did that go?',
    'Nice, I am glad to hear that.',
    'Wow, that must have taken a lot of effort.',
    'Good for you! Anything else going on?',
)


class ChatAgent(Protocol):
    speaker_id: str

    def respond(self, context: str, turn: int) -> str:
        """turn counts this agent's own utterances in the current session."""
        ...


def _events_of(line: str) -> Tuple[str, List[str]]:
    speaker, _, body = line.partition(': ')
    return speaker, [d.strip() for d in body.rstrip('.').split(', ') if d.strip()]


class MockChatAgent:
    """
    Deterministic offline speaker. The reply depends only on the seed, the
    speaker and the context, and talks about events that moved forward
    rather than events that did not.
    """

    def __init__(self, speaker_id: str, seed: Union[int, str] = 0):
        self.speaker_id = speaker_id
        self.seed = seed

    def _rng(self, context: str, turn: int) -> random.Random:
        return random.Random(f'{self.seed}/{self.speaker_id}/{turn}/{stable_hash({"context": context})}')

    def _topics(self, block: ContextBlock) -> Tuple[List[str], List[str]]:
        """Sentences about own events that moved, and descriptions of the stalled ones."""
        moving: List[str] = []
        stalled: List[str] = []

        for line in block.progress_lines or ():
            speaker, items = parse_progress_line(line)
            if speaker != self.speaker_id:
                continue
            for description, label in items:
                if label == ProgressLabel.NO_SIGNIFICANT_PROGRESS:
                    stalled.append(description)
                elif label == ProgressLabel.FINISHED:
                    moving.append(f'I finally finished {description}!')
                else:
                    moving.append(f'{description.capitalize()} is {label.text} now.')

        for line in block.schedule_lines or ():
            speaker, items = parse_schedule_line(line)
            if speaker != self.speaker_id:
                continue
            for description, split in items:
                if split.finished:
                    moving.append(f'For {description}, I am done with {split.finished[-1].description}.')
                if split.todo:
                    moving.append(f'Next for {description} is {split.todo[0].description}.')

        if not moving:
            for line in block.events_lines or ():
                speaker, descriptions = _events_of(line)
                if speaker == self.speaker_id:
                    moving += [f'I am busy with {d} these days.' for d in descriptions if d not in stalled]
        return moving, stalled

    def respond(self, context: str, turn: int) -> str:
        rng = self._rng(context, turn)
        try:
            block: Optional[ContextBlock] = parse_context(context)
        except ChronochatError:
            logger.debug('mock agent %s could not read its context', self.speaker_id)
            block = None

        if block is None:
            return rng.choice(SMALL_TALK)

        moving, _ = self._topics(block)
        if turn == 0 and block.gap_line is not None:
            opener = f'Hi! It has been {block.gap_line} since we last talked.'
            return f'{opener} {moving[0]}' if moving else f'{opener} How have you been?'

        roll = rng.random()
        if moving and roll < 0.5:
            return rng.choice(moving)
        if roll < 0.75:
            return rng.choice(FOLLOW_UPS)
        return rng.choice(SMALL_TALK)


class LlmChatAgent:
    """
    Speaker backed by a chat-completion backend and the chat_turn prompt.
    """

    def __init__(self,
                 speaker_id: str,
                 backend: Union[BackendConfig, ChatBackend],
                 library: Optional[TemplateLibrary] = None):
        self.speaker_id = speaker_id
        self.backend = resolve_backend(backend)
        self.library = library or default_library()

    def respond(self, context: str, turn: int) -> str:
        bindings = {'context': context, 'speaker': self.speaker_id}
        messages = self.library.messages('chat_turn', bindings)
        reply = self.backend.complete(messages, template='chat_turn', bindings=bindings)

        lines = [line for line in (reply or '').splitlines() if line.strip()]
        text = SPEAKER_PREFIX_RE.sub('', lines[0]).strip() if lines else ''
        if not text:
            raise EmptyReply(f'speaker {self.speaker_id} produced an empty utterance')
        return text
