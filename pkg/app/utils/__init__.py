from app.utils.logger import logger, set_quiet

__all__ = ["logger", "set_quiet"]
