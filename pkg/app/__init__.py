import logging

_configured = False


def configure_logging(level: str = "WARNING") -> None:
    """Send log records to stderr; stdout is reserved for command output."""
    global _configured
    root = logging.getLogger()
    if not _configured:
        logging.basicConfig(format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        _configured = True
    root.setLevel(level.upper())
