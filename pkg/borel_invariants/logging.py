import logging
from typing import Union

import click

LOGGER_NAME = "borel_invariants"
DEFAULT_LOG_LEVEL = logging.WARNING
LOG_LEVEL_CHOICES = ("ERROR", "WARNING", "INFO", "DEBUG")
_LEVEL_COLORS = {
    "ERROR": "red",
    "WARNING": "yellow",
    "INFO": "blue",
    "DEBUG": "cyan",
}


class ClickFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        level = record.levelname
        if color := _LEVEL_COLORS.get(level):
            level = click.style(level, fg=color, bold=True)

        return f"{level}: {record.getMessage()}"


class ClickHandler(logging.Handler):
    """
    Writes records to stderr through ``click.echo`` so stdout stays
    reserved for command output.
    """

    def emit(self, record: logging.LogRecord):
        try:
            click.echo(self.format(record), err=True)
        except Exception:
            self.handleError(record)


def get_logger(name: str = LOGGER_NAME) -> logging.Logger:
    _logger = logging.getLogger(name)
    if not any(isinstance(h, ClickHandler) for h in _logger.handlers):
        handler = ClickHandler()
        handler.setFormatter(ClickFormatter())
        _logger.addHandler(handler)
        _logger.setLevel(DEFAULT_LOG_LEVEL)

    return _logger


def set_level(level: Union[int, str]):
    if isinstance(level, str):
        level = level.upper()
        if level not in LOG_LEVEL_CHOICES:
            raise ValueError(f"Unknown log level '{level}'.")

    logger.setLevel(level)


logger = get_logger()
