"""
Driving the HTTP service
========================

The same session flow the CLI offers, over HTTP. This script boots the
service on a loopback port, walks one session through generation and
the exit survey, and shuts the server down again.
"""

import json
import tempfile
import threading
import time
import urllib.request
from importlib import resources
from pathlib import Path

import uvicorn

from carbonsight.service import ServiceConfig, create_app

workdir = Path(tempfile.mkdtemp(prefix="carbonsight-demo-"))
dataset_path = workdir / "materials.json"
dataset_path.write_bytes(
    resources.files("carbonsight.data").joinpath("materials_fixture.json").read_bytes()
)

config = ServiceConfig(
    dataset_path=dataset_path,
    session_dir=workdir / "sessions",
    gateway_mode="mock",
    port=8977,
)
server = uvicorn.Server(
    uvicorn.Config(create_app(config), host="127.0.0.1", port=config.port,
                   log_level="warning")
)
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)

base = f"http://127.0.0.1:{config.port}"


def call(method: str, path: str, body: dict | None = None) -> dict:
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(
        base + path, data=data, method=method,
        headers={"content-type": "application/json"},
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


print(call("GET", "/healthz"))

session = call("POST", "/sessions",
               {"participant_label": "demo", "condition": "T3"})
sid = session["session_id"]
print(f"session {sid} open, condition {session['condition']}")

iteration = call("POST", f"/sessions/{sid}/iterations",
                 {"prompt": "a courtyard with reclaimed brick"})
print(f"iteration {iteration['index']}:"
      f" {len(iteration['report']['insights'])} insights,"
      f" {iteration['attempts_remaining']} attempts remaining")

# Generated images are served by content hash, cacheable forever.
image_id = iteration["report"]["image"]["image_id"]
with urllib.request.urlopen(f"{base}/images/{image_id}") as resp:
    png = resp.read()
    print(f"image: {resp.headers['content-type']}, {len(png)} bytes,"
          f" cache-control: {resp.headers['cache-control']}")

call("POST", f"/sessions/{sid}/iterations/1/reflection",
     {"text": "less brick, more planting"})

done = call("POST", f"/sessions/{sid}/finalize",
            {"satisfaction": "yes", "sustainability_considered": "yes",
             "insights_useful": "somewhat"})
print(f"final survey coded: {done['final_survey']['insights_useful']}")

print(call("GET", "/study/summary"))

server.should_exit = True
thread.join(timeout=5)
print("server stopped")
