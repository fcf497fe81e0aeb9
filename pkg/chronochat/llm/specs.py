import os

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple

from chronochat.errors import BadConfig
from chronochat.simulation.temporal import Duration

# ordered (role, content) pairs sent to a chat-completion backend
Messages = List[Tuple[str, str]]


class BackendMode:
    HTTP = 'http'
    MOCK = 'mock'

    ALL = (HTTP, MOCK)


class ExtractionStyle:
    INSTRUCTION = 'instruction'
    SLOT_FILLING = 'slot_filling'
    QA = 'qa'

    ALL = (INSTRUCTION, SLOT_FILLING, QA)


@dataclass(frozen=True)
class PromptTemplate:
    """
    A named prompt with {{slot}} markers. Every marker found in the body or
    in the system text is a required slot.
    """
    name: str
    body: str
    required_slots: FrozenSet[str] = frozenset()
    system: str = ''
    description: str = ''

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {}

        result['name'] = self.name
        result['description'] = self.description
        result['system'] = self.system
        result['body'] = self.body
        result['required_slots'] = sorted(self.required_slots)

        return result


@dataclass(frozen=True)
class BackendConfig:
    """
    Where chat completions come from. The credential is referenced by the
    name of the environment variable holding it, never by value.
    """
    mode: str = BackendMode.MOCK
    url: str = ''
    key_var: str = ''
    model: str = ''
    timeout: float = 30.0
    max_retries: int = 2
    fixtures: str = ''
    rate_per_minute: int = 0
    retry_backoff: float = 1.0

    def validate(self) -> 'BackendConfig':
        if self.mode not in BackendMode.ALL:
            raise BadConfig(f'unknown backend mode {self.mode!r}, expected one of {BackendMode.ALL}')
        if self.mode == BackendMode.HTTP and not (self.url and self.key_var):
            raise BadConfig('http backend needs an endpoint URL and a credential variable name')
        if self.mode == BackendMode.MOCK and not self.fixtures:
            raise BadConfig('mock backend needs a fixture file')
        if self.timeout <= 0 or self.max_retries < 0 or self.rate_per_minute < 0:
            raise BadConfig('timeout must be positive, retries and rate non-negative')
        return self

    @property
    def api_key(self) -> str:
        return os.environ.get(self.key_var, '') if self.key_var else ''

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None, **overrides: Any) -> 'BackendConfig':
        env = os.environ if environ is None else environ
        values: Dict[str, Any] = {
            'mode': env.get('CHRONOCHAT_LLM_MODE', BackendMode.MOCK),
            'url': env.get('CHRONOCHAT_LLM_URL', ''),
            'key_var': env.get('CHRONOCHAT_LLM_KEY_VAR', ''),
            'model': env.get('CHRONOCHAT_LLM_MODEL', ''),
            'fixtures': env.get('CHRONOCHAT_LLM_FIXTURES', ''),
        }
        try:
            values['timeout'] = float(env.get('CHRONOCHAT_LLM_TIMEOUT', 30))
            values['max_retries'] = int(env.get('CHRONOCHAT_LLM_RETRIES', 2))
            values['rate_per_minute'] = int(env.get('CHRONOCHAT_LLM_RATE', 0))
        except ValueError as e:
            raise BadConfig(f'invalid numeric backend setting: {e}') from e

        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class ExtractedEvent:
    speaker: str
    description: str
    estimated_duration: Optional[Duration] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'speaker': self.speaker,
            'description': self.description,
            'estimated_duration': str(self.estimated_duration) if self.estimated_duration else None,
        }


@dataclass(frozen=True)
class ExtractionResult:
    """Parsed events plus the number of reply lines that did not parse."""
    events: Tuple[ExtractedEvent, ...] = ()
    skipped: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {'events': [e.to_dict() for e in self.events], 'skipped': self.skipped}


@dataclass(frozen=True)
class FixtureRecord:
    """A recorded reply for one (template, bindings) pair."""
    template: str
    bindings: Mapping[str, str] = field(default_factory=dict)
    reply: str = ''
