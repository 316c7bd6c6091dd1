"""Native-peer counterpart for the browser interop tests.

Connects to a relay over TCP, creates a room, prints the join details as
one JSON line, then echoes JSON messages received on component 100 back
to the sender's scene until it is killed or times out.
"""

import asyncio
import json
import random
import sys

from ubiq.rooms import RoomClient
from ubiq.scene import PeerScene
from ubiq.transport import ConnectionSpec, connect
from ubiq.wire import from_text_object, make_address, to_text_object

ECHO_COMPONENT = 100


async def main() -> int:
    port = int(sys.argv[1])
    scene = PeerScene(random.Random())
    client = RoomClient(scene)
    await connect(scene, ConnectionSpec("tcp", "127.0.0.1", port))
    client.join(name="interop", publish=False)
    loop = asyncio.get_running_loop()
    deadline = loop.time() + 10
    while client.room is None:
        scene.dispatch()
        if loop.time() > deadline:
            print("join timed out", file=sys.stderr)
            return 1
        await asyncio.sleep(0.005)

    def echo(msg):
        data = from_text_object(msg.payload)
        scene.send(make_address(int(data["replyTo"]), ECHO_COMPONENT),
                   to_text_object({"echo": data["text"],
                                   "from": client.me.uuid}))

    scene.register(echo, make_address(scene.scene_id.value, ECHO_COMPONENT))
    print(json.dumps({"joincode": client.room.joincode,
                      "sceneid": str(scene.scene_id.value),
                      "uuid": client.me.uuid}), flush=True)

    end = loop.time() + 60
    while loop.time() < end:
        scene.dispatch()
        await asyncio.sleep(0.005)
    return 0


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
