"""Service layer: pydantic schemas, FastAPI app, and a thin client."""

from .app import app

__all__ = ["app"]
