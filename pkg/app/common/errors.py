"""
Command-wide error handling: exceptions to exit codes.

- 0: success / checker pass
- 1: checker fail, witness JSON on stdout
- 2: usage, domain or table errors, and anything unexpected
"""

import sys
from typing import Any, Optional, TextIO

from app.common.io import json_text
from app.services.base import CheckFailedError, ServiceError
from logger.logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def _emit(payload: Any, stream: Optional[TextIO]) -> None:
    out = stream if stream is not None else sys.stdout
    out.write(json_text(payload) + "\n")


def handle_command_error(exc: BaseException, stream: Optional[TextIO] = None) -> int:
    """Reports exc on stdout and returns the exit code for it."""
    if isinstance(exc, CheckFailedError):
        logger.info(f"❌ check failed: {exc.message}")
        _emit({"verdict": "fail", "message": exc.message, "witness": exc.details}, stream)
        return EXIT_FAIL

    if isinstance(exc, ServiceError):
        logger.warning(f"⚠️ ServiceError handled: Code='{exc.error_code}', Message='{exc.message}'")
        _emit(
            {"error": {"message": exc.message, "type": exc.error_code, "details": exc.details}},
            stream,
        )
        return EXIT_ERROR

    logger.opt(exception=exc).error(f"❌ Unhandled exception: {exc}")
    _emit(
        {"error": {"message": "An unexpected internal error occurred.", "type": "INTERNAL_ERROR"}},
        stream,
    )
    return EXIT_ERROR
