"""Command-line entry point"""
import json
import math
import sys
from pathlib import Path
from typing import Any, List, Optional
from loguru import logger
from pydantic import ValidationError
from app.cli.commands import COMMANDS
from app.cli.config_file import parse_config, validate_options
from app.cli.parser import parse_arguments
from app.cli.schemas import RunConfig
from app.core.config import settings
from app.core.exceptions import ConfigError, ToolkitError, UsageError
from app.core.logging import setup_logging


def _finite(value: Any) -> Any:
    """Replace inf/nan by None so summaries stay strict JSON"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_finite(item) for item in value]
    return value


def load_run_config(argv: List[str]) -> RunConfig:
    """
    Merge the optional --config file with the flags given on the command line

    Raises:
        UsageError: bad flags, unreadable or invalid config file
    """
    options = parse_arguments(argv)
    config_path = options.pop("config", None)
    merged = {}
    if config_path is not None:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config file {config_path}: {exc}") from exc
        merged = parse_config(text).model_dump(exclude_defaults=True)
    merged.update(options)
    return validate_options(merged)


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Run one command and print its one-line JSON summary on stdout

    Returns:
        0 on success, 2 on domain errors, 1 on usage errors
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    setup_logging()
    try:
        config = load_run_config(argv)
        logger.info(f"{settings.APP_NAME} {settings.APP_VERSION}: {config.command.value}")
        summary = COMMANDS[config.command](config)
    except SystemExit as exc:
        # --help / --version
        return int(exc.code or 0)
    except ToolkitError as exc:
        if isinstance(exc, UsageError) and not isinstance(exc, ConfigError):
            sys.stderr.write(exc.detail + "\n")
        else:
            logger.error(exc.detail)
        return exc.exit_code
    except (ValidationError, ValueError) as exc:
        logger.error(str(exc))
        return UsageError.exit_code

    print(json.dumps(_finite(summary)), flush=True)
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
