import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

# ---------------- CONFIG ---------------- #

from planefix.config import Config

# ---------------- LOGGING ---------------- #

_handlers: List[logging.Handler] = [logging.StreamHandler()]
if Config.LOG_FILE:
    _handlers.append(logging.FileHandler(Config.LOG_FILE))

logging.basicConfig(
    format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
    handlers=_handlers,
    level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
)

logging.getLogger("PIL").setLevel(logging.WARNING)

LOGGER = logging.getLogger(__name__)

__version__ = "0.3.0"

# ---------------- COMMAND REGISTRY ---------------- #


@dataclass(frozen=True)
class CommandHandler:
    """A named sub-command: callback(args) -> exit code."""
    name: str
    callback: Callable[..., int]
    help: str = ""
    takes_file: bool = True


@dataclass
class Application:
    """Registry that feature modules add their command handlers to."""
    handlers: Dict[str, CommandHandler] = field(default_factory=dict)

    def add_handler(self, handler: CommandHandler) -> None:
        if handler.name in self.handlers:
            LOGGER.warning(f"⚠️ Command '{handler.name}' registered twice, keeping the latest")
        self.handlers[handler.name] = handler

    def get(self, name: str) -> Optional[CommandHandler]:
        return self.handlers.get(name)

    def names(self) -> List[str]:
        return sorted(self.handlers)


application = Application()

__all__ = [
    "Config",
    "LOGGER",
    "Application",
    "CommandHandler",
    "application",
    "__version__",
]
