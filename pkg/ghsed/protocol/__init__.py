from .client import GhsedClient, client_search, client_store, parse_address
from .server import GhsedServer, GhsedService, serve

__all__ = [
    "GhsedClient",
    "GhsedServer",
    "GhsedService",
    "client_search",
    "client_store",
    "parse_address",
    "serve",
]
