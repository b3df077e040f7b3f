"""
File output with atomic replacement.
"""
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Generator, TextIO, Union

logger = logging.getLogger(__name__)


@contextmanager
def atomic_write(path: Union[str, Path]) -> Generator[TextIO, None, None]:
    """Write to a temporary file next to path and move it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    handle = None
    tmp_name = None
    try:
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        handle = os.fdopen(fd, 'w', newline='', encoding='utf-8')
        logger.debug(f"Writing {path} via {tmp_name}")

        yield handle
        handle.close()
        os.replace(tmp_name, path)
        logger.debug(f"Wrote {path}")

    except BaseException as e:
        if handle and not handle.closed:
            handle.close()
        if tmp_name and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        logger.error(f"Write to {path} failed, temporary file removed: {e}")
        raise
