"""In-process relay: a RoomServer wired to scenes over loopback pairs.

Delivery is synchronous and deterministic, so distributed behaviour can
be driven step by step in one process with no sockets.
"""

from ..rooms import RoomServer
from ..transport import loopback_pair


class LocalRelay:
    def __init__(self, **server_kwargs):
        self.server = RoomServer(**server_kwargs)
        self.scenes = []

    def connect(self, scene):
        """Cross-wire a scene to the relay; returns the client end."""
        client_end, server_end = loopback_pair()
        self.server.handle_connection(server_end)
        scene.add_connection(client_end)
        if scene not in self.scenes:
            self.scenes.append(scene)
        return client_end

    def pump(self, max_rounds=100):
        """Dispatch all scenes until no more callbacks fire."""
        for _ in range(max_rounds):
            delivered = sum(scene.dispatch() for scene in self.scenes)
            if delivered == 0:
                return
        raise RuntimeError("relay did not quiesce")
