"""HTTP faces of the testbed agents: memory, responder, coordinator, the
deterministic mock chat endpoint and the token-counting forward proxy.
Each app is built by a factory so experiments can run several instances
side by side on loopback."""

from .server import ServerHandle, wait_healthy

__all__ = ["ServerHandle", "wait_healthy"]
