"""Driving the operators through a chat-completions endpoint.

For a self-contained demo this starts a tiny local server that answers like a
model would: a one-line plan, a JSON vector in a fenced block, and a short
insight. Point `url` at a real server to use an actual model.
"""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from pesevo import Engine, RunConfig
from pesevo.config import OperatorConfig, TaskConfig


class FakeModel(BaseHTTPRequestHandler):
    rng = np.random.default_rng(0)

    def log_message(self, *args):
        pass

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        system, user = body["messages"][0]["content"], body["messages"][1]["content"]
        if "plan the next" in system:
            text = "Shrink both coordinates by a random factor."
        elif "implement a plan" in system:
            parent = json.loads(user.split("```\n")[1].split("\n```")[0])
            child = [round(float(v * self.rng.uniform(0.3, 1.0)), 6) for v in parent]
            text = f"```json\n{json.dumps(child)}\n```"
        else:
            text = "Smaller coordinates helped; keep shrinking."
        data = json.dumps({"choices": [{"message": {"content": text}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


server = ThreadingHTTPServer(("127.0.0.1", 0), FakeModel)
threading.Thread(target=server.serve_forever, daemon=True).start()
url = f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"

config = RunConfig(
    task=TaskConfig("rastrigin", {"d": 2}),
    operators=OperatorConfig(kind="endpoint", url=url, timeout=10),
    islands=2,
    iterations=15,
)
result = Engine(config).run()
server.shutdown()

statuses = [e["status"] for e in result.events if e["event"] == "generation"]
print(f"{statuses.count('evaluated')} of {len(statuses)} generations evaluated")
print(f"best score {result.best.score:.4f} from plan: {result.best.generate_plan!r}")
print(f"summary: {result.best.summary!r}")
