"""GHSED: keyword search over encrypted documents on an untrusted server."""
