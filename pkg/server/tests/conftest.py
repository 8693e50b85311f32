import socket
import threading
import time

import pytest
import uvicorn

from phraseattack_server.service import create_app
from phraseattack_server.toy import build_toy_model_set


@pytest.fixture(scope="session")
def toy_models():
    """Train the full toy model set once per session (CPU, a few minutes)."""
    model_set, reports = build_toy_model_set(out_dir=None, seed=11, with_lm=True)
    return model_set, reports


@pytest.fixture(scope="session")
def served_url(toy_models):
    model_set, _ = toy_models
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(create_app(model_set), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("uvicorn did not start in time")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
