"""Agent wire protocol: newline-delimited JSON over child-process
standard streams or a TCP socket.

Message types::

    hello           {"type": "hello", "protocol": 1, "name": ...}
    request_orders  {"type": "request_orders", "game": ..., "power": ...,
                     "phase": "S1901M", "state": {...},
                     "prev_orders": {POWER: [text, ...]},
                     "legal": {LOC: [text, ...]},
                     "board": tensor, "prev_order_tensor": tensor,
                     "decode_order": [LOC, ...], "layout": ...}
    orders          {"type": "orders", "orders": [text, ...]}
    error           {"type": "error", "message": ...}
    bye             {"type": "bye"}

Every request_orders is answered by exactly one orders/error message;
per-session ordering is FIFO. Tensors ride along so that external
agents never reimplement the board featurization.
"""

from __future__ import annotations

import json
import os
import queue
import shlex
import socket
import subprocess
import sys
import threading

from .errors import ProtocolError

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT = float(os.environ.get("NOPRESS_AGENT_TIMEOUT", "5.0"))


class Session:
    """One agent connection with a background line reader."""

    def __init__(self, send_line, close, name="agent"):
        self._send_line = send_line
        self._close = close
        self.name = name
        self._lines: queue.Queue = queue.Queue()
        self._eof = False

    def _feed(self, readline):
        try:
            for line in iter(readline, ""):
                line = line.strip()
                if line:
                    self._lines.put(line)
        finally:
            self._eof = True
            self._lines.put(None)

    def start_reader(self, readline):
        t = threading.Thread(target=self._feed, args=(readline,), daemon=True)
        t.start()

    def send(self, message: dict) -> None:
        self._send_line(json.dumps(message, sort_keys=True) + "\n")

    def recv(self, timeout: float | None) -> dict:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ProtocolError(f"{self.name}: timed out waiting for reply")
        if line is None:
            raise ProtocolError(f"{self.name}: connection closed")
        try:
            return json.loads(line)
        except json.JSONDecodeError as e:
            raise ProtocolError(f"{self.name}: bad JSON: {e}") from e

    def close(self):
        try:
            self.send({"type": "bye"})
        except Exception:
            pass
        self._close()


def open_session(spec: str, name: str | None = None) -> Session:
    """``process:<argv>`` spawns a child; ``tcp:<host>:<port>`` connects."""
    try:
        return _open_session(spec, name)
    except (OSError, ValueError) as e:
        raise ProtocolError(f"cannot reach agent {spec!r}: {e}") from e


def _open_session(spec: str, name: str | None = None) -> Session:
    if spec.startswith("process:"):
        argv = shlex.split(spec[len("process:"):])
        proc = subprocess.Popen(argv, stdin=subprocess.PIPE,
                                stdout=subprocess.PIPE, text=True,
                                bufsize=1)

        def send(line):
            proc.stdin.write(line)
            proc.stdin.flush()

        def close():
            try:
                proc.stdin.close()
            except Exception:
                pass
            proc.terminate()

        session = Session(send, close, name or argv[0])
        session.start_reader(proc.stdout.readline)
    elif spec.startswith("tcp:"):
        _, host, port = spec.split(":", 2)
        sock = socket.create_connection((host, int(port)),
                                        timeout=DEFAULT_TIMEOUT)
        f = sock.makefile("rw", encoding="utf-8", newline="\n")

        def send(line):
            f.write(line)
            f.flush()

        def close():
            try:
                f.close()
            finally:
                sock.close()

        session = Session(send, close, name or spec)
        session.start_reader(f.readline)
    else:
        raise ProtocolError(f"unknown endpoint spec {spec!r}")

    session.send({"type": "hello", "protocol": PROTOCOL_VERSION,
                  "name": "nopress-engine"})
    reply = session.recv(DEFAULT_TIMEOUT)
    if reply.get("type") != "hello":
        raise ProtocolError(f"agent greeted with {reply.get('type')!r}")
    return session


def request_orders(session: Session, obs, timeout: float | None = None,
                   include_tensors: bool = True) -> list[str]:
    """Forward an observation, await the agent's order texts."""
    from .features import (TENSOR_LAYOUT_VERSION, decode_ordering,
                           encode_board, encode_prev_orders, tensor_to_wire)
    from .orders import format_order
    from .state import state_to_dict

    payload = {
        "type": "request_orders",
        "power": obs.power,
        "phase": obs.phase.code,
        "state": state_to_dict(obs.state),
        "prev_orders": {p: [format_order(o) for o in orders]
                        for p, orders in obs.prev_orders.items()},
        "legal": {loc: sorted(format_order(o) for o in legal)
                  for loc, legal in obs.legal.items()},
        "decode_order": decode_ordering(obs.map, list(obs.legal)),
        "layout": TENSOR_LAYOUT_VERSION,
    }
    if include_tensors:
        payload["board"] = tensor_to_wire(encode_board(obs.map, obs.state))
        payload["prev_order_tensor"] = tensor_to_wire(
            encode_prev_orders(obs.map, obs.prev_orders, obs.state))
    session.send(payload)
    reply = session.recv(timeout if timeout is not None else DEFAULT_TIMEOUT)
    if reply.get("type") == "error":
        raise ProtocolError(f"agent error: {reply.get('message')}")
    if reply.get("type") != "orders" or not isinstance(reply.get("orders"), list):
        raise ProtocolError(f"expected orders, got {reply.get('type')!r}")
    return [str(t) for t in reply["orders"]]


def serve_stdio(handler) -> None:
    """Run an agent over stdin/stdout.

    ``handler(payload) -> list[str]`` maps a request_orders payload to
    order texts. Used by first-party test agents; external agents can
    speak the protocol in any language.
    """
    out = sys.stdout

    def reply(msg):
        out.write(json.dumps(msg, sort_keys=True) + "\n")
        out.flush()

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            reply({"type": "error", "message": "bad json"})
            continue
        kind = msg.get("type")
        if kind == "hello":
            reply({"type": "hello", "protocol": PROTOCOL_VERSION,
                   "name": "agent"})
        elif kind == "request_orders":
            try:
                reply({"type": "orders", "orders": handler(msg)})
            except Exception as e:  # noqa: BLE001 - agent must answer
                reply({"type": "error", "message": str(e)})
        elif kind == "bye":
            break
