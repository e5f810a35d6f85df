from .store import LoggedTurn, LogStore, SessionLog
from .service import ServiceConfig, create_app

__all__ = ["LogStore", "SessionLog", "LoggedTurn", "ServiceConfig", "create_app"]
