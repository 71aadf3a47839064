"""Advisory concept lookup against a remote Athena-style service.

Disabled by default; when disabled no network activity happens at all.
Results are candidates for a human to consider, never auto-committed to
the repository. The supported response subset is an object with a
"content" array of {id, code, name, vocabulary} items.
"""

from __future__ import annotations

from dataclasses import dataclass

import httpx


@dataclass(frozen=True)
class RemoteConceptSource:
    base_url: str = ""
    timeout: float = 5.0
    enabled: bool = False


@dataclass(frozen=True)
class RemoteCandidate:
    code: str
    name: str
    vocabulary: str
    remote_id: int | None = None


class RemoteLookupError(Exception):
    """code is "remote_disabled" or "remote_unavailable"."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


def remote_lookup(
    query: str,
    source: RemoteConceptSource,
    transport: httpx.BaseTransport | None = None,
) -> list[RemoteCandidate]:
    """Fetch concept candidates matching the query string.

    ``transport`` lets tests swap in an httpx.MockTransport; production
    callers leave it None.
    """
    if not source.enabled:
        raise RemoteLookupError("remote_disabled", "remote concept lookup is disabled")
    try:
        with httpx.Client(
            base_url=source.base_url, timeout=source.timeout, transport=transport
        ) as client:
            response = client.get("/concepts", params={"query": query})
            response.raise_for_status()
            document = response.json()
    except httpx.HTTPError as exc:
        raise RemoteLookupError(
            "remote_unavailable", f"remote lookup failed: {exc}"
        ) from exc
    except ValueError as exc:
        raise RemoteLookupError(
            "remote_unavailable", f"remote returned malformed JSON: {exc}"
        ) from exc

    content = document.get("content") if isinstance(document, dict) else None
    if not isinstance(content, list):
        raise RemoteLookupError(
            "remote_unavailable", 'remote response missing "content" array'
        )
    candidates = []
    for item in content:
        if not isinstance(item, dict):
            continue
        code = item.get("code")
        name = item.get("name")
        vocabulary = item.get("vocabulary")
        if not all(isinstance(v, str) and v for v in (code, name, vocabulary)):
            continue
        remote_id = item.get("id")
        candidates.append(
            RemoteCandidate(
                code=code,
                name=name,
                vocabulary=vocabulary,
                remote_id=remote_id if isinstance(remote_id, int) else None,
            )
        )
    return candidates
