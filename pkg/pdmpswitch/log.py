#
# Logging setup for the toolkit.
#
# Levels use a numeric scale so a single integer can be passed around
# on the command line and in .env:
#   5 trace, 4 debug, 3 info, 2 warning, 1 error, 0 off
#
import logging
import sys

TRACE = 5

_LEVELS = {
    5: TRACE,
    4: logging.DEBUG,
    3: logging.INFO,
    2: logging.WARNING,
    1: logging.ERROR,
    0: logging.CRITICAL + 10,
}

logging.addLevelName(TRACE, "TRACE")

_FORMAT = "%(asctime)s.%(msecs)03d %(levelname)-7s %(name)s: %(message)s"
_DATEFMT = "%H:%M:%S"


def to_logging_level(level: int) -> int:
    if level >= 5:
        return TRACE
    if level <= 0:
        return _LEVELS[0]
    return _LEVELS[level]


def setup_logging(level: int = 3, filename: str = "") -> logging.Logger:
    """
    Configure the package logger once. Console output goes to stderr so that
    stdout stays reserved for machine readable summaries.
    """
    logger = logging.getLogger("pdmpswitch")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    logger.setLevel(to_logging_level(level))
    logger.propagate = False
    formatter = logging.Formatter(_FORMAT, datefmt=_DATEFMT)

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    logger.addHandler(console)

    if filename:
        logfile = logging.FileHandler(filename, mode="a", encoding="utf-8")
        logfile.setFormatter(formatter)
        logger.addHandler(logfile)

    return logger


def trace(logger: logging.Logger, msg: str, *args) -> None:
    if logger.isEnabledFor(TRACE):
        logger.log(TRACE, msg, *args)
