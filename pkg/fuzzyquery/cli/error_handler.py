import json
import sys
import traceback
from typing import Any, Callable, Dict

from pydantic import ValidationError

from fuzzyquery.core.logging_service import get_logging_service
from fuzzyquery.errors import EXIT_CONFIG, EXIT_RUNTIME, FuzzyQueryError


def error_payload(e: BaseException) -> Dict[str, Any]:
    payload: Dict[str, Any] = {"error": type(e).__name__, "message": str(e)}
    if isinstance(e, FuzzyQueryError) and e.context:
        payload["context"] = e.context
    elif isinstance(e, ValidationError):
        payload["context"] = {"errors": e.errors(include_url=False)}
    return payload


def exit_code_for(e: BaseException) -> int:
    if isinstance(e, FuzzyQueryError):
        return e.exit_code
    if isinstance(e, ValidationError):
        return EXIT_CONFIG
    return EXIT_RUNTIME


def run_command(command: Callable[[Any], None], args: Any) -> int:
    """Run one CLI command; errors become a JSON object on stderr and an exit code"""
    try:
        command(args)
        return 0
    except Exception as e:
        error_type = type(e).__name__
        trace = traceback.format_exc()
        try:
            get_logging_service().log_error(
                error_type=error_type,
                error_message=str(e),
                context={"command": getattr(args, "command", None), "trace": trace},
            )
        except Exception as log_error:
            print(f"Failed to log error: {log_error}", file=sys.stderr)

        print(json.dumps(error_payload(e), default=str), file=sys.stderr)
        return exit_code_for(e)
