import logging
import os

LOG_ENV_VAR = "NEWTON_FORGE_LOG"

LOG_LEVELS = {
    "quiet": logging.WARNING,
    "summary": logging.INFO,
    "trace": logging.DEBUG,
}


def log_level_from_env(default: str = "summary") -> int:
    value = os.environ.get(LOG_ENV_VAR, default).strip().lower()
    if value not in LOG_LEVELS:
        raise ValueError(
            f"{LOG_ENV_VAR}={value!r} is not one of {', '.join(sorted(LOG_LEVELS))}"
        )
    return LOG_LEVELS[value]


def configure_logging(level: int | None = None) -> logging.Logger:
    """Attach a single stream handler to the package logger.

    Safe to call more than once; later calls only adjust the level.
    """
    logger = logging.getLogger("app")
    logger.setLevel(level if level is not None else log_level_from_env())
    if not any(getattr(h, "_newton_forge", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        handler._newton_forge = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    return logger
