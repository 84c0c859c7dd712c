"""HTTP service wrapping the kggraph core."""

from .app import create_app

__all__ = ["create_app"]
