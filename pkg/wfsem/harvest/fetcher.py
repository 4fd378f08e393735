"""
Document fetchers.

HttpFetcher is the contract the harvester depends on: fetch(url, timeout)
returns the response body or raises FetchError. RequestsFetcher talks HTTP
with urllib3 retries; FixtureFetcher serves files from a directory where each
file is named by the SHA-256 hex digest of its URL, for tests and offline runs.
"""

import hashlib
import threading
from pathlib import Path
from typing import Iterable, Optional, Protocol, Union

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from ..errors import FetchError
from ..log import get_logger

log = get_logger(__name__)

DEFAULT_TIMEOUT = 10.0
DEFAULT_RETRIES = 2
DEFAULT_BACKOFF = 0.5
RETRY_STATUSES = (408, 429, 500, 502, 503, 504)


class HttpFetcher(Protocol):
    def fetch(self, url: str, timeout: Optional[float] = None) -> bytes:
        ...


def fixture_name(url: str) -> str:
    """File name a FixtureFetcher looks up for a URL."""
    return hashlib.sha256(url.encode("utf-8")).hexdigest()


class RequestsFetcher:
    """
    HTTP GET with retries.

    Each thread gets its own requests.Session, so one fetcher can serve a
    parallel harvest.
    """

    def __init__(self, timeout: float = DEFAULT_TIMEOUT, retries: int = DEFAULT_RETRIES,
                 backoff: float = DEFAULT_BACKOFF,
                 retry_statuses: Iterable[int] = RETRY_STATUSES):
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.retry_statuses = tuple(retry_statuses)
        self._local = threading.local()
        self._sessions = []
        self._lock = threading.Lock()

    def _session(self) -> requests.Session:
        session = getattr(self._local, "session", None)
        if session is None:
            session = requests.Session()
            retry = Retry(
                total=self.retries,
                backoff_factor=self.backoff,
                status_forcelist=self.retry_statuses,
                allowed_methods=["GET"],
                raise_on_status=False,
            )
            adapter = HTTPAdapter(max_retries=retry)
            session.mount("http://", adapter)
            session.mount("https://", adapter)
            session.headers["User-Agent"] = "wfsem-harvester"
            self._local.session = session
            with self._lock:
                self._sessions.append(session)
        return session

    def fetch(self, url: str, timeout: Optional[float] = None) -> bytes:
        try:
            response = self._session().get(url, timeout=timeout or self.timeout)
            response.raise_for_status()
        except requests.RequestException as e:
            raise FetchError(url, str(e)) from e
        log.debug(f"GET {url}: {len(response.content)} bytes")
        return response.content

    def close(self) -> None:
        with self._lock:
            for session in self._sessions:
                session.close()
            self._sessions.clear()


class FixtureFetcher:
    """Serves <directory>/<sha256(url)> instead of the network."""

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def fetch(self, url: str, timeout: Optional[float] = None) -> bytes:
        path = self.directory / fixture_name(url)
        if not path.is_file():
            raise FetchError(url, f"no fixture {path.name}")
        return path.read_bytes()

    def close(self) -> None:
        pass
