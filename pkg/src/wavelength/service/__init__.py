"""HTTP service: study data collection plus evaluation endpoints."""

from .app import ServiceSettings, create_app
from .study import StudyConfig, StudyRuntime

__all__ = ["ServiceSettings", "StudyConfig", "StudyRuntime", "create_app"]
