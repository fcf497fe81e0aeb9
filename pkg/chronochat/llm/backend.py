"""
Chat-completion backends.

HttpBackend posts an OpenAI-style request:
  {"model": ..., "messages": [{"role": ..., "content": ...}]}
and reads only choices[0].message.content from the response.

MockBackend answers from recorded fixtures keyed by template name and a
stable hash of the bindings; it never makes up a reply.
"""

from typing import Any, Dict, List, Mapping, Optional, Protocol, Union

import functools
import logging
import os
import threading
import time
import httpx
import yaml

from pathlib import Path

from chronochat.errors import (
    BackendError,
    HttpError,
    MalformedDocument,
    MissingFile,
    MissingFixture,
    RateLimited,
    Timeout,
)
from chronochat.metrics import CHRONOCHAT_METRICS
from chronochat.utils import stable_hash

from .specs import BackendConfig, BackendMode, FixtureRecord, Messages

logger = logging.getLogger(__name__)

REFERENCE_FIXTURES = Path(__file__).parent / 'fixtures' / 'reference.yaml'


def fixture_key(template: str, bindings: Optional[Mapping[str, Any]]) -> str:
    """
    Key of a recorded reply: template name plus a hash of the bindings
    with every value taken as text.
    """
    normalised = {str(k): str(v) for k, v in (bindings or {}).items()}
    return f'{template}:{stable_hash(normalised)}'


class ChatBackend(Protocol):
    mode: str

    def complete(self,
                 messages: Messages,
                 template: str = '',
                 bindings: Optional[Mapping[str, Any]] = None) -> str:
        ...


class RateLimiter:
    """
    Token bucket allowing at most rate_per_minute acquisitions per minute.
    A rate of zero disables limiting.
    """

    def __init__(self, rate_per_minute: int, clock=time.monotonic, sleep=time.sleep):
        self.rate_per_minute = rate_per_minute
        self.capacity = max(rate_per_minute, 1)
        self._tokens = float(self.capacity)
        self._clock = clock
        self._sleep = sleep
        self._updated = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if self.rate_per_minute <= 0:
            return
        with self._lock:
            while True:
                now = self._clock()
                refill = (now - self._updated) * self.rate_per_minute / 60.0
                self._tokens = min(float(self.capacity), self._tokens + refill)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) * 60.0 / self.rate_per_minute
                logger.debug('rate limit reached, waiting %.2fs', wait)
                self._sleep(wait)


_RATE_LIMITERS: Dict[int, RateLimiter] = {}
_RATE_LIMITERS_LOCK = threading.Lock()


def process_rate_limiter(rate_per_minute: int) -> RateLimiter:
    """One shared limiter per configured rate in this process."""
    with _RATE_LIMITERS_LOCK:
        limiter = _RATE_LIMITERS.get(rate_per_minute)
        if limiter is None:
            limiter = _RATE_LIMITERS[rate_per_minute] = RateLimiter(rate_per_minute)
        return limiter


class HttpBackend:
    mode = BackendMode.HTTP

    HEADERS = {
        'Accept': 'application/json',
        'Content-Type': 'application/json',
        'Authorization': 'Bearer {}'
    }

    def __init__(self,
                 config: BackendConfig,
                 transport: Optional[httpx.BaseTransport] = None,
                 rate_limiter: Optional[RateLimiter] = None,
                 sleep=time.sleep):
        self.config = config
        self._transport = transport
        self._limiter = rate_limiter or process_rate_limiter(config.rate_per_minute)
        self._sleep = sleep

    def build_request(self, messages: Messages) -> Dict[str, Any]:
        return {
            'model': self.config.model,
            'messages': [{'role': role, 'content': content} for role, content in messages],
        }

    def _headers(self) -> Dict[str, str]:
        headers = self.HEADERS.copy()
        key = self.config.api_key
        if key:
            headers['Authorization'] = headers['Authorization'].format(key)
        else:
            headers.pop('Authorization')
        return headers

    @staticmethod
    def read_reply(payload: Any) -> str:
        try:
            content = payload['choices'][0]['message']['content']
        except (KeyError, IndexError, TypeError) as e:
            raise BackendError(f'malformed chat completion response: {e!r}') from e
        if not isinstance(content, str):
            raise BackendError('chat completion content is not text')
        return content

    def complete(self,
                 messages: Messages,
                 template: str = '',
                 bindings: Optional[Mapping[str, Any]] = None) -> str:
        """
        One chat completion; timeouts, 429 and 5xx answers are retried up
        to max_retries times.
        """
        if not messages:
            raise BackendError('cannot complete an empty message list')

        body = self.build_request(messages)
        attempts = self.config.max_retries + 1
        last_error: BackendError = BackendError('no attempt made')

        for attempt in range(1, attempts + 1):
            self._limiter.acquire()
            try:
                with httpx.Client(timeout=self.config.timeout, transport=self._transport) as client:
                    r = client.post(self.config.url, json=body, headers=self._headers())
            except httpx.TimeoutException as e:
                last_error = Timeout(f'chat completion timed out after {self.config.timeout}s')
                logger.warning('chat completion attempt %d/%d timed out: %s', attempt, attempts, e)
            except httpx.HTTPError as e:
                last_error = BackendError(f'chat completion transport error: {e}')
                logger.warning('chat completion attempt %d/%d failed: %s', attempt, attempts, e)
            else:
                if r.status_code == 200:
                    try:
                        payload = r.json()
                    except ValueError as e:
                        CHRONOCHAT_METRICS.inc_llm_calls(self.mode, 'error')
                        raise BackendError(f'chat completion returned invalid JSON: {e}') from e
                    try:
                        reply = self.read_reply(payload)
                    except BackendError:
                        CHRONOCHAT_METRICS.inc_llm_calls(self.mode, 'error')
                        raise
                    CHRONOCHAT_METRICS.inc_llm_calls(self.mode, 'ok')
                    logger.debug('chat completion for %s: %d characters', template or 'messages', len(reply))
                    return reply
                if r.status_code == 429:
                    last_error = RateLimited(f'chat completion rate limited: {r.text[:200]}')
                elif r.status_code >= 500:
                    last_error = HttpError(r.status_code, r.text)
                else:
                    CHRONOCHAT_METRICS.inc_llm_calls(self.mode, 'error')
                    raise HttpError(r.status_code, r.text)
                logger.warning('chat completion attempt %d/%d answered %d', attempt, attempts, r.status_code)

            if attempt < attempts and self.config.retry_backoff > 0:
                self._sleep(self.config.retry_backoff * attempt)

        CHRONOCHAT_METRICS.inc_llm_calls(self.mode, 'error')
        raise last_error


class MockBackend:
    mode = BackendMode.MOCK

    def __init__(self, replies: Mapping[str, str]):
        self.replies: Dict[str, str] = dict(replies)

    @classmethod
    def from_records(cls, records: List[FixtureRecord]) -> 'MockBackend':
        return cls({fixture_key(r.template, r.bindings): r.reply for r in records})

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'MockBackend':
        return cls.from_records(load_fixture_records(path))

    def complete(self,
                 messages: Messages,
                 template: str = '',
                 bindings: Optional[Mapping[str, Any]] = None) -> str:
        if not messages:
            raise BackendError('cannot complete an empty message list')
        key = fixture_key(template, bindings)
        reply = self.replies.get(key)
        if reply is None:
            CHRONOCHAT_METRICS.inc_llm_calls(self.mode, 'missing')
            raise MissingFixture(key)
        logger.debug('fixture %s answered %d characters', key, len(reply))
        CHRONOCHAT_METRICS.inc_llm_calls(self.mode, 'ok')
        return reply


def load_fixture_records(path: Union[str, Path]) -> List[FixtureRecord]:
    """
    Read a fixture YAML file of records:
      fixtures:
        - template: estimate_duration
          bindings: {event: writing doctorate thesis}
          reply: one year
    """
    if not os.path.exists(path):
        raise MissingFile(f'Fixture file {path} does not exists')

    try:
        with open(path, 'r', encoding='utf-8') as f:
            cfg = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise MalformedDocument(f'Invalid YAML structure in {path}: {e}') from e

    if not isinstance(cfg, dict):
        raise MalformedDocument(f'Cant find fixtures section within YAML file {path}')

    records: List[FixtureRecord] = []
    for raw in cfg.get('fixtures') or []:
        if not isinstance(raw, dict) or 'template' not in raw or 'reply' not in raw:
            raise MalformedDocument(f'fixture record without template or reply in {path}: {raw!r}')
        records.append(FixtureRecord(template=str(raw['template']),
                                     bindings={str(k): str(v) for k, v in (raw.get('bindings') or {}).items()},
                                     reply=str(raw['reply'])))
    logger.debug('loaded %d fixtures from %s', len(records), path)
    return records


def dump_fixture_records(records: List[FixtureRecord], path: Union[str, Path]) -> None:
    document = {'fixtures': [{'template': r.template, 'bindings': dict(r.bindings), 'reply': r.reply}
                             for r in records]}
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(document, f, sort_keys=False, allow_unicode=True)


@functools.lru_cache(maxsize=16)
def _mock_backend(path: str, mtime: float) -> MockBackend:
    return MockBackend.from_file(path)


def create_backend(config: BackendConfig) -> ChatBackend:
    """
    Backend for a validated config; mock fixture files are read once
    unless they change on disk.
    """
    config.validate()
    if config.mode == BackendMode.MOCK:
        path = str(config.fixtures)
        if not os.path.exists(path):
            raise MissingFile(f'Fixture file {path} does not exists')
        return _mock_backend(path, os.path.getmtime(path))
    return HttpBackend(config)


def resolve_backend(backend: Union[BackendConfig, ChatBackend]) -> ChatBackend:
    if isinstance(backend, BackendConfig):
        return create_backend(backend)
    return backend


def complete(backend: Union[BackendConfig, ChatBackend],
             messages: Messages,
             template: str = '',
             bindings: Optional[Mapping[str, Any]] = None) -> str:
    return resolve_backend(backend).complete(messages, template=template, bindings=bindings)
