import logging
import os
from logging.handlers import RotatingFileHandler

LOG_FILE_NAME = 'flock_sa_system.log'


class SystemLogger:
    """Configures the ``flock_sa`` logger once per process.

    FLOCK_SA_LOG_DIR picks the directory (default ``logs``) and
    FLOCK_SA_LOG_LEVEL the level (default INFO).
    """
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(SystemLogger, cls).__new__(cls)
            cls._instance.logger = cls._instance._setup_logger()
        return cls._instance

    def _setup_logger(self):
        log_dir = os.environ.get("FLOCK_SA_LOG_DIR", "logs")
        os.makedirs(log_dir, exist_ok=True)
        log_path = os.path.abspath(os.path.join(log_dir, LOG_FILE_NAME))

        # Library modules log to children of this logger.
        logger = logging.getLogger("flock_sa")
        level_name = os.environ.get("FLOCK_SA_LOG_LEVEL", "INFO").upper()
        logger.setLevel(getattr(logging, level_name, logging.INFO))

        # forked sweep workers inherit the parent's handler
        for existing in logger.handlers:
            if getattr(existing, 'baseFilename', None) == log_path:
                return logger

        handler = RotatingFileHandler(log_path, maxBytes=5 * 1024 * 1024, backupCount=2)
        handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
        logger.addHandler(handler)
        return logger

    def get_logger(self):
        return self.logger
