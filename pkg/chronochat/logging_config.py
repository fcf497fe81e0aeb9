import logging
import logging.config
import yaml

from pathlib import Path
from typing import Optional, Union


def setup_logging(config_path: Optional[Union[str, Path]] = None,
                  fallback_level: int = logging.WARNING) -> None:
    root = logging.getLogger()
    if root.handlers:
        return  # already configured

    path = Path(config_path) if config_path else None

    if path is None or not path.exists():
        logging.basicConfig(level=fallback_level,
                            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        return

    with open(path, 'r', encoding='utf-8') as f:
        config = yaml.safe_load(f)

    logging.config.dictConfig(config)
