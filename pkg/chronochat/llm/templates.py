from typing import Any, Dict, Mapping, Optional, Union

import logging
import os
import re
import yaml

from pathlib import Path

from chronochat.errors import MalformedDocument, MissingFile, MissingSlot, UnknownTemplate

from .specs import Messages, PromptTemplate

logger = logging.getLogger(__name__)

TEMPLATES_PATH = Path(__file__).with_name('templates.yaml')

SLOT_RE = re.compile(r'\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}')


def template_slots(text: str) -> frozenset:
    return frozenset(SLOT_RE.findall(text))


def render_prompt(template: PromptTemplate, bindings: Mapping[str, Any]) -> str:
    """
    Substitute every {{slot}} in the template body. Bound values are
    inserted verbatim and never rescanned for markers.
    """
    _check_bindings(template, bindings)
    return _substitute(template.body, bindings)


def render_messages(template: PromptTemplate, bindings: Mapping[str, Any]) -> Messages:
    """
    Render to chat messages: an optional system message, then the body as
    the user message.
    """
    _check_bindings(template, bindings)
    messages: Messages = []
    if template.system:
        messages.append(('system', _substitute(template.system, bindings)))
    messages.append(('user', _substitute(template.body, bindings)))
    return messages


def _check_bindings(template: PromptTemplate, bindings: Mapping[str, Any]) -> None:
    missing = sorted(template.required_slots - set(bindings))
    if missing:
        raise MissingSlot(missing[0], template.name)


def _substitute(text: str, bindings: Mapping[str, Any]) -> str:
    return SLOT_RE.sub(lambda m: str(bindings[m.group(1)]), text)


class TemplateLibrary:
    """
    Prompt templates loaded from a YAML file, looked up by name.
    """
    templates: Dict[str, PromptTemplate]
    config_file_path: Path

    def __init__(self, config_path: Union[str, Path] = TEMPLATES_PATH):
        self.config_file_path = Path(config_path)
        self.templates = self.load_templates(self.config_file_path)

    @staticmethod
    def load_templates(path: Union[str, Path]) -> Dict[str, PromptTemplate]:
        """
        Load name -> PromptTemplate from a templates YAML file.
        """
        if not os.path.exists(path):
            raise MissingFile(f'Template file {path} does not exists')

        try:
            with open(path, 'r', encoding='utf-8') as f:
                cfg: Dict[str, Any] = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise MalformedDocument(f'Invalid YAML structure in {path}: {e}') from e

        section = cfg.get('templates') if isinstance(cfg, dict) else None
        if not section or not isinstance(section, dict):
            raise MalformedDocument(f'Cant find templates section within YAML file {path}')

        result: Dict[str, PromptTemplate] = {}
        for name, raw in section.items():
            if not isinstance(raw, dict) or not raw.get('body'):
                raise MalformedDocument(f'template {name} in {path} has no body')
            body = str(raw['body'])
            system = str(raw.get('system') or '')
            result[name] = PromptTemplate(name=name,
                                          body=body,
                                          required_slots=template_slots(body) | template_slots(system),
                                          system=system,
                                          description=str(raw.get('description') or ''))

        logger.debug('loaded %d prompt templates from %s', len(result), path)
        return result

    def get(self, name: str) -> PromptTemplate:
        template = self.templates.get(name)
        if template is None:
            raise UnknownTemplate(f'unknown prompt template {name!r}')
        return template

    def render(self, name: str, bindings: Mapping[str, Any]) -> str:
        return render_prompt(self.get(name), bindings)

    def messages(self, name: str, bindings: Mapping[str, Any]) -> Messages:
        return render_messages(self.get(name), bindings)

    def names(self):
        return sorted(self.templates)


_DEFAULT_LIBRARY: Optional[TemplateLibrary] = None


def default_library() -> TemplateLibrary:
    """The bundled templates, loaded once per process."""
    global _DEFAULT_LIBRARY
    if _DEFAULT_LIBRARY is None:
        _DEFAULT_LIBRARY = TemplateLibrary()
    return _DEFAULT_LIBRARY
