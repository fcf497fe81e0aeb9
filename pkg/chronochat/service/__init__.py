"""
Timed two-party chat rooms: room state and log replay, file-backed
persistence and participant tokens.
"""
__version__ = "0.1.0"
__author__ = "chronochat contributors"

from .specs import DEFAULT_MIN_UTTERANCES, Phase, RoomConfig, RoomEvent, RoomEventKind
from .store import RoomStore
from .tokens import TokenSigner
from .rooms import DEFAULT_POLL_WAIT, Room, RoomManager

__all__ = [
    "DEFAULT_MIN_UTTERANCES",
    "DEFAULT_POLL_WAIT",
    "Phase",
    "Room",
    "RoomConfig",
    "RoomEvent",
    "RoomEventKind",
    "RoomManager",
    "RoomStore",
    "TokenSigner",
]
