"""Bundled sample data."""

from importlib import resources
from pathlib import Path


def worked_example_path() -> Path:
    """Path of the bundled five-requirement sample project."""
    return Path(resources.files(__name__) / "worked_example.project")
