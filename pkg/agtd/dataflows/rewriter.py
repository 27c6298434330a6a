"""External rewriter adapter with an on-disk cache.

The rewriting model never runs in-process: a user-configured command receives
the prompt as an argument and the text on stdin, and prints the rewrite.
"""

import logging
import os
import shlex
import subprocess
import tempfile
import threading
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from agtd.dataflows.utils import sha256_text
from agtd.errors import RewriterError

logger = logging.getLogger(__name__)

PROMPT_PLACEHOLDER = "{prompt}"


class CommandRewriter:
    """Runs ``command`` once per (text, prompt) and caches stdout by content hash."""

    def __init__(
        self,
        command: Union[str, Sequence[str]],
        cache_dir: Optional[Union[str, Path]] = None,
        timeout: float = 120.0,
    ):
        if not command:
            raise RewriterError("no rewriter command configured")
        self.template: List[str] = shlex.split(command) if isinstance(command, str) else list(command)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.timeout = timeout
        self.spawn_count = 0
        self._locks: Dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _argv(self, prompt: str) -> List[str]:
        return [part.replace(PROMPT_PLACEHOLDER, prompt) for part in self.template]

    def cache_path(self, text: str, prompt: str) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        return self.cache_dir / f"{sha256_text(text)}_{sha256_text(prompt)}.txt"

    def _lock_for(self, key: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    def _spawn(self, text: str, prompt: str) -> str:
        argv = self._argv(prompt)
        with self._guard:
            self.spawn_count += 1
        logger.debug("Spawning rewriter: %s", shlex.join(argv))
        try:
            proc = subprocess.run(
                argv,
                input=text.encode("utf-8"),
                capture_output=True,
                timeout=self.timeout,
                check=False,
            )
        except subprocess.TimeoutExpired as e:
            raise RewriterError(f"rewriter '{argv[0]}' timed out after {self.timeout}s") from e
        except OSError as e:
            raise RewriterError(f"rewriter '{argv[0]}' could not be started: {e}") from e

        stderr = proc.stderr.decode("utf-8", errors="replace")
        if proc.returncode != 0:
            raise RewriterError(f"rewriter '{argv[0]}' failed", returncode=proc.returncode, stderr=stderr)
        output = proc.stdout.decode("utf-8")
        if not output.strip():
            raise RewriterError(f"rewriter '{argv[0]}' produced no output")
        return output

    def rewrite(self, text: str, prompt: str) -> str:
        if not text:
            raise RewriterError("cannot rewrite empty text")
        path = self.cache_path(text, prompt)
        if path is None:
            return self._spawn(text, prompt)

        with self._lock_for(path.name):
            if path.exists():
                logger.debug("Rewriter cache hit %s", path.name)
                return path.read_text(encoding="utf-8")
            output = self._spawn(text, prompt)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(output)
            os.replace(tmp, path)
            return output


def run_rewriter(
    command: Union[str, Sequence[str], CommandRewriter],
    text: str,
    prompt: str,
    cache_dir: Optional[Union[str, Path]] = None,
    timeout: float = 120.0,
) -> str:
    """One rewrite through ``command``; pass a CommandRewriter to share its cache and counter."""
    rewriter = command if isinstance(command, CommandRewriter) else CommandRewriter(command, cache_dir, timeout)
    return rewriter.rewrite(text, prompt)
