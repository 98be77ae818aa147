"""JSON file reading with positioned parse errors."""
import json

from .errors import ParseError


def load_json(path, what: str = "file") -> dict:
    """Read a JSON document, turning syntax errors into :class:`ParseError`."""
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {what}: {exc.strerror}", path) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError(f"{what} must be a JSON object", path, 1, 1)
    return data
