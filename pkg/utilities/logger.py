import logging
import multiprocessing
import shutil
from logging.handlers import QueueHandler, QueueListener, RotatingFileHandler

from simple_logger.logger import DuplicateFilter, WrapperLogFormatter

LOGGER = logging.getLogger(__name__)

BASIC_LOGGER_NAME = "basic"
DEFAULT_LOG_FILE = "tqc-decoder.log"


def setup_logging(log_level: int, log_file: str | None = DEFAULT_LOG_FILE) -> QueueListener:
    """
    Route root and "basic" logging through one queue to the console and, optionally, a rotating file.

    The "basic" logger prints bare messages (separators, result tables); the root logger
    prints timestamped, colored records.

    Args:
        log_level (int): log level
        log_file (str | None): logging output file, console only when None

    Returns:
        QueueListener: listener draining the log queue; stop it before exiting

    Eg:
       root QueueHandler ┐                         ┌> StreamHandler
                         ├> Queue -> QueueListener ┤
      basic QueueHandler ┘                         └> RotatingFileHandler
    """
    basic_log_formatter = logging.Formatter(fmt="%(message)s")
    root_log_formatter = WrapperLogFormatter(
        fmt="%(asctime)s %(name)s %(log_color)s%(levelname)s%(reset)s %(message)s",
        log_colors={
            "DEBUG": "cyan",
            "INFO": "green",
            "WARNING": "yellow",
            "ERROR": "red",
            "CRITICAL": "red,bg_white",
        },
        secondary_log_colors={},
    )

    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(RotatingFileHandler(filename=log_file, maxBytes=100 * 1024 * 1024, backupCount=5))

    log_queue = multiprocessing.Queue(maxsize=-1)  # type: ignore[var-annotated]
    log_listener = QueueListener(log_queue, *handlers)

    basic_log_queue_handler = QueueHandler(queue=log_queue)
    basic_log_queue_handler.set_name(name=BASIC_LOGGER_NAME)
    basic_log_queue_handler.setFormatter(fmt=basic_log_formatter)

    basic_logger = logging.getLogger(BASIC_LOGGER_NAME)
    basic_logger.setLevel(level=log_level)
    basic_logger.addHandler(hdlr=basic_log_queue_handler)

    root_log_queue_handler = QueueHandler(queue=log_queue)
    root_log_queue_handler.set_name(name="root")
    root_log_queue_handler.setFormatter(fmt=root_log_formatter)

    root_logger = logging.getLogger()
    root_logger.setLevel(level=log_level)
    root_logger.addHandler(hdlr=root_log_queue_handler)
    root_logger.addFilter(filter=DuplicateFilter())

    root_logger.propagate = False
    basic_logger.propagate = False

    log_listener.start()
    return log_listener


def logging_configured() -> bool:
    return any(isinstance(handler, QueueHandler) for handler in logging.getLogger().handlers)


def teardown_logging(log_listener: QueueListener) -> None:
    log_listener.stop()
    for handler in log_listener.handlers:
        handler.close()
    for name in (None, BASIC_LOGGER_NAME):
        logger = logging.getLogger(name)
        for handler in [h for h in logger.handlers if getattr(h, "queue", None) is log_listener.queue]:
            logger.removeHandler(handler)


def separator(symbol_: str, val: str | None = None) -> str:
    terminal_width = shutil.get_terminal_size(fallback=(120, 40))[0]
    if not val:
        return f"{symbol_ * terminal_width}"

    sepa = int((terminal_width - len(val) - 2) // 2)
    return f"{symbol_ * sepa} {val} {symbol_ * sepa}"
