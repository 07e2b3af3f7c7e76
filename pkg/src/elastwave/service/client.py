"""Small synchronous client for the service.

Without a server URL the requests run in-process against the ASGI app, so
the command-line front end works standalone; with a URL they go over HTTP
to a running instance.
"""

from __future__ import annotations

import asyncio

import httpx


class ServiceClient:
    def __init__(self, server: str | None = None, timeout: float = 600.0):
        self.server = server
        self.timeout = timeout

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=self.timeout) as client:
                resp = client.post(path, json=payload)
                return resp.status_code, resp.json()
        return asyncio.run(self._post_inprocess(path, payload))

    async def _post_inprocess(self, path: str, payload: dict) -> tuple[int, dict]:
        from .app import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://elastwave.local",
                                     timeout=self.timeout) as client:
            resp = await client.post(path, json=payload)
            return resp.status_code, resp.json()
