"""
chronochat package
simulates the passage of time across multi-session dialogues: event
timelines, progress over session gaps, time-aware model inputs, self-chat
and human chat rooms, and pairwise human evaluation.
Exports:
- create_app
- run

"""
__version__ = "0.1.0"
__author__ = "chronochat contributors"


from .main import create_app
from .cli import run

__all__ = ["create_app", "run"]
