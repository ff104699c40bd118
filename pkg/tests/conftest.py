import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

_criteria: dict[str, str] = {}


class StubModel:
    """Minimal chat-completions server whose replies are scripted per role.

    ``script`` maps a role ("planner", "executor", "summarizer") to a callable
    ``(call_index) -> (delay_seconds, body)`` where body is a dict (sent as
    JSON) or a str (sent raw).
    """

    def __init__(self):
        self.calls: dict[str, int] = {"planner": 0, "executor": 0, "summarizer": 0}
        self.requests: list[dict] = []
        self.script = {}
        self.lock = threading.Lock()

    @staticmethod
    def reply(text: str) -> dict:
        return {"choices": [{"message": {"role": "assistant", "content": text}}]}

    def role_of(self, body: dict) -> str:
        system = body["messages"][0]["content"]
        if "plan the next" in system:
            return "planner"
        if "implement a plan" in system:
            return "executor"
        return "summarizer"


@pytest.fixture
def stub_model():
    model = StubModel()

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(length))
            role = model.role_of(body)
            with model.lock:
                index = model.calls[role]
                model.calls[role] += 1
                model.requests.append(body)
            delay, out = model.script[role](index)
            if delay:
                time.sleep(delay)
            raw = out if isinstance(out, str) else json.dumps(out)
            data = raw.encode()
            try:
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)
            except (BrokenPipeError, ConnectionResetError):
                pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    server.daemon_threads = True
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    model.url = f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
    try:
        yield model
    finally:
        server.shutdown()
        server.server_close()


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[name] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_criteria.items(), key=lambda kv: _order(kv[0])):
        terminalreporter.write_line(f"{outcome:<7} {name}")


def _order(name: str) -> int:
    digits = "".join(ch for ch in name.split("_")[2] if ch.isdigit()) if name.count("_") >= 2 else ""
    return int(digits) if digits else 99
