"""HTTP prediction service exposing the staged classifier."""
from .app import create_app

__all__ = ["create_app"]
