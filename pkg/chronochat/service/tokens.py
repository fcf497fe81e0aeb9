import logging
import os
import secrets

from pathlib import Path
from typing import Mapping, Optional, Union

import jwt

from chronochat.errors import InvalidToken

logger = logging.getLogger(__name__)

SECRET_FILE = 'token_secret'


class TokenSigner:
    """
    Participant tokens are HS256 JWTs naming the room and the speaker.
    They carry no expiry: rooms live on a simulated clock.
    """
    ALGORITHM = 'HS256'

    def __init__(self, secret: str):
        if not secret:
            raise ValueError('token secret must not be empty')
        self._secret = secret

    @classmethod
    def from_env(cls,
                 data_dir: Union[str, Path],
                 environ: Optional[Mapping[str, str]] = None) -> 'TokenSigner':
        """
        Secret from CHRONOCHAT_TOKEN_SECRET, else one generated once and
        kept in the data directory so tokens survive restarts.
        """
        environ = os.environ if environ is None else environ
        secret = environ.get('CHRONOCHAT_TOKEN_SECRET')
        if secret:
            return cls(secret)

        path = Path(data_dir) / SECRET_FILE
        if path.exists():
            return cls(path.read_text(encoding='utf-8').strip())

        path.parent.mkdir(parents=True, exist_ok=True)
        secret = secrets.token_hex(32)
        path.write_text(secret, encoding='utf-8')
        os.chmod(path, 0o600)
        logger.info('generated a new token secret in %s', path)
        return cls(secret)

    def issue(self, room_id: str, speaker: str) -> str:
        claims = {'room': room_id, 'speaker': speaker, 'jti': secrets.token_hex(8)}
        return jwt.encode(claims, self._secret, algorithm=self.ALGORITHM)

    def verify(self, token: Optional[str], room_id: str) -> str:
        """
        Speaker id of a valid token for room_id.
        """
        if not token:
            raise InvalidToken('a participant token is required')
        try:
            claims = jwt.decode(token, self._secret, algorithms=[self.ALGORITHM])
        except jwt.PyJWTError as e:
            raise InvalidToken(f'invalid participant token: {e}') from e
        if claims.get('room') != room_id or claims.get('speaker') not in ('A', 'B'):
            raise InvalidToken('token does not belong to this room')
        return claims['speaker']
