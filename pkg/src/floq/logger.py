import logging
import sys
from pathlib import Path
from typing import Optional, Union
try:
    import colorama
except ImportError: # pragma: no cover
    colorama = None # pragma: no cover
else:
    colorama.init()


__all__ = ["setup_logging"]


class _CommandFilter(logging.Filter):
    """
    A logging filter that stamps every record with the running subcommand.

    :ivar command: Name written into ``record.command``.
    :type command: str
    """
    def __init__(self, command: str):
        super().__init__()
        self.command = command

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = self.command
        return True


class _ColorFormatter(logging.Formatter):
    """
    A formatter that colors each message by its level.

    CRITICAL is reserved for the final result line of a command and is
    shown in bold green.

    :ivar RESET: ANSI escape sequence to reset any applied color.
    :type RESET: str
    :ivar COLORS: Mapping of log levels to their respective ANSI color codes.
    :type COLORS: dict[int, str]
    """
    RESET = "\x1b[0m"
    COLORS = {
        logging.DEBUG:      "\x1b[90m",     # grey
        logging.INFO:       "",             # default
        logging.WARNING:    "\x1b[33m",     # yellow
        logging.ERROR:      "\x1b[31m",     # red
        logging.CRITICAL:   "\x1b[1;32m"    # green
    }

    def format(self, record: logging.LogRecord) -> str:
        msg = super().format(record)
        color = self.COLORS.get(record.levelno, "")
        if not color:
            return msg
        return f"{color}{msg}{self.RESET}"


def setup_logging(debug: bool, log_file: Optional[Union[str, Path]] = None, command: str = "floq") -> None:
    """
    Configure the root logger for one command.

    Console output goes to stderr so that artifacts written to stdout stay
    machine readable. Handlers installed by an earlier call are replaced.

    :param debug: DEBUG level when True, INFO otherwise.
    :param log_file: Optional path of a log file in the timestamped format.
    :param command: Subcommand recorded on every log line of the file.
    :return: None
    """
    level = logging.DEBUG if debug else logging.INFO

    file_fmt = "%(asctime)s %(command)-10s | %(levelname)-8s > %(message)s"
    datefmt = "%Y/%m/%d-%H:%M:%S"
    file_formatter = logging.Formatter(file_fmt, datefmt=datefmt)

    stderr_formatter = _ColorFormatter("%(message)s")

    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, "floq", False)]:
        root.removeHandler(handler)
        handler.close()
    root.setLevel(level)

    command_filter = _CommandFilter(command)

    h_err = logging.StreamHandler(sys.stderr)
    h_err.setLevel(level)
    h_err.setFormatter(stderr_formatter)
    h_err.addFilter(command_filter)
    h_err.floq = True
    root.addHandler(h_err)

    if log_file:
        h_file = logging.FileHandler(log_file)
        h_file.setLevel(level)
        h_file.setFormatter(file_formatter)
        h_file.addFilter(command_filter)
        h_file.floq = True
        root.addHandler(h_file)
