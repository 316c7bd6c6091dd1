"""Replicated object spawning.

A blueprint is a named factory for a networked object. Spawning mints a
fresh network id, instantiates locally and broadcasts; spawners on remote
peers instantiate the same blueprint bound to the carried id, so only one
id is synchronised for the whole object.
"""

import logging
import random

from ..wire import NetworkId, from_text_object, generate_network_id, make_address

log = logging.getLogger(__name__)

# Well-known service address for spawn broadcasts.
SPAWNER_ADDRESS = make_address(3, 1)


class SpawnError(Exception):
    pass


class UnknownBlueprintError(SpawnError):
    pass


class BlueprintRegistry:
    """Name -> factory(network_id) -> instance. Factories must be
    deterministic given (name, id) so peers converge."""

    def __init__(self):
        self._factories = {}

    def add(self, name: str, factory):
        if name in self._factories:
            raise ValueError(f"blueprint {name!r} already registered")
        self._factories[name] = factory

    def __contains__(self, name):
        return name in self._factories

    def create(self, name: str, network_id: NetworkId):
        try:
            factory = self._factories[name]
        except KeyError:
            raise UnknownBlueprintError(name) from None
        return factory(network_id)


class Spawner:
    def __init__(self, scene, registry: BlueprintRegistry, rng=None):
        self.scene = scene
        self.registry = registry
        self.rng = rng or random.Random()
        self.instances = {}  # NetworkId -> (blueprint name, instance)
        self.ctx = scene.register(self, SPAWNER_ADDRESS)

    def spawn(self, blueprint: str) -> NetworkId:
        """Instantiate locally and broadcast to all peers."""
        if blueprint not in self.registry:
            raise UnknownBlueprintError(blueprint)
        network_id = generate_network_id(self.rng)
        self.instances[network_id] = (blueprint, self.registry.create(blueprint, network_id))
        self.ctx.send_json(SPAWNER_ADDRESS, {
            "type": "spawn",
            "blueprint": blueprint,
            "networkId": str(network_id.value),
        })
        return network_id

    def receive(self, msg):
        try:
            data = from_text_object(msg.payload)
            if data.get("type") != "spawn":
                return
            blueprint = data["blueprint"]
            network_id = NetworkId(int(data["networkId"]))
        except Exception:
            log.warning("spawner: unparseable spawn message")
            return
        if network_id in self.instances:
            log.warning("spawner: duplicate spawn for id %d ignored", network_id.value)
            return
        if blueprint not in self.registry:
            log.warning("spawner: unknown blueprint %r ignored", blueprint)
            return
        self.instances[network_id] = (blueprint, self.registry.create(blueprint, network_id))
