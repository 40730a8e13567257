#!/usr/bin/env python3
"""A tour of the HTTP service: upload, infer, touch, map, stream.

Starts the server on an ephemeral port, drives the same calls the browser
UI makes, and tails the 50 Hz gain stream for half a second.
"""

import json
import socket
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from vibroscene.service import make_app

ROOT = Path(__file__).resolve().parent.parent

with socket.socket() as probe:
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
server = uvicorn.Server(uvicorn.Config(
    make_app(corpus_path=ROOT / "corpus" / "manifest.json"),
    host="127.0.0.1", port=port, log_level="error",
))
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.01)
base = f"http://127.0.0.1:{port}"
print(f"server up at {base}\n")

with httpx.Client(timeout=30.0) as client:
    scene_id = client.post(
        f"{base}/scenes",
        content=(ROOT / "scenes" / "study2_smartphone.json").read_bytes(),
    ).json()["scene_id"]
    print(f"POST /scenes -> {scene_id}")

    inferred = client.post(f"{base}/scenes/{scene_id}/infer?backend=mock").json()
    print(f"POST /scenes/{scene_id}/infer -> category "
          f"{inferred['scene_category']!r}, {len(inferred['objects'])} objects")

    touch = client.post(f"{base}/scenes/{scene_id}/touch", json={
        "object_id": "table", "point": [-0.05, 0.77, 0.0], "client": "demo",
    }).json()
    for gain in touch["gains"]:
        print(f"POST .../touch table@0.4m -> source {gain['source']} "
              f"gain {gain['display']} via {' -> '.join(gain['path'])}")

    amap = client.get(
        f"{base}/scenes/{scene_id}/attenuation-map?object=table&resolution=4"
    ).json()
    print(f"GET .../attenuation-map -> {amap['resolution']}x{amap['resolution']} "
          f"grid on axes ({amap['u_axis']}, {amap['v_axis']})")

    client.put(f"{base}/scenes/{scene_id}/mode", json={"mode": "full"})
    print(f"PUT .../mode full -> "
          f"{client.get(f'{base}/scenes/{scene_id}/mode').json()}")

    print("\nGET .../stream (25 blocks while the table touch is held):")
    shown = 0
    with client.stream("GET",
                       f"{base}/scenes/{scene_id}/stream?blocks=25") as stream:
        for line in stream.iter_lines():
            if line.startswith("data: "):
                message = json.loads(line[6:])
                if shown % 5 == 0:
                    print(f"  t={message['t']:.2f}s gains={message['displays']} "
                          f"rms={message['rms']:.4f}")
                shown += 1

server.should_exit = True
print("\ndone")
