"""pose-extractor: detector adapter emitting posekit annotation documents."""

from .backends import BACKENDS, BackendUnavailable, ExtractorBackend, FrameReadError, StubBackend
from .extract import build_document, validate_with_primary, write_document_atomic

__version__ = "0.1.0"
