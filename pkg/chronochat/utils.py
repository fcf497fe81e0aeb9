"""
Common utilities used across chronochat
"""

import hashlib
import json
import re

from typing import Any, List, Mapping

TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")

STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been
before being below between both but by can could did do does doing down during
each few for from further had has have having he her here hers herself him
himself his how i if in into is it its itself just let me more most my myself
no nor not now of off on once only or other our ours ourselves out over own
same she should so some such than that the their theirs them themselves then
there these they this those through to too under until up very was we were
what when where which while who whom why will with would you your yours
yourself yourselves i'm you're it's that's what's don't can't i've i'll
""".split())


def tokenize(text: str) -> List[str]:
    """
    Lowercase word tokens, apostrophe contractions kept whole
    """
    return TOKEN_RE.findall(text.lower())


def content_words(text: str) -> List[str]:
    """
    Tokens with stopwords removed, order preserved
    """
    return [t for t in tokenize(text) if t not in STOPWORDS]


def stable_hash(payload: Mapping[str, Any], length: int = 16) -> str:
    """
    Hash of a JSON-serialisable mapping that does not depend on key order
    or on the interpreter's hash seed
    """
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:length]
