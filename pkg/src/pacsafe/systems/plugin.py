"""Client for external simulators speaking line-delimited JSON.

The child process reads one JSON request per line on stdin and writes one
JSON reply per line on stdout::

    {"op": "info"}                      -> {"n": int, "n_d": int, "safe_set": {...}}
    {"op": "step", "x": [...], "d": [...]} -> {"x_next": [...]}
    {"op": "sample_d", "seed_hint": u64}   -> {"d": [...]}

A reply may instead be ``{"error": "message"}``.  Anything else, a reply
that does not arrive within the timeout, or a dead child raises
:class:`~pacsafe.errors.PluginError`.
"""
from __future__ import annotations

import json
import logging
import math
import queue
import shlex
import subprocess
import threading
from typing import Optional, Sequence, Union

import numpy as np

from ..core import SafeSet
from ..errors import ConfigError, PluginError
from .base import BlackBoxSystem

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 5.0
_EOF = object()


def _float_list(value, length: int, field: str) -> list:
    if not isinstance(value, list) or len(value) != length:
        raise PluginError(f"plugin reply field {field!r} must be a list of {length} numbers, got {value!r}")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise PluginError(f"plugin reply field {field!r} has a non-finite or non-numeric entry: {v!r}")
        out.append(float(v))
    return out


class PluginSystem(BlackBoxSystem):
    """A :class:`BlackBoxSystem` backed by a child process."""

    def __init__(self, command: Union[str, Sequence[str]], timeout: float = DEFAULT_TIMEOUT,
                 name: Optional[str] = None):
        self.command = command if isinstance(command, str) else shlex.join(command)
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise ConfigError("empty plugin command")
        self.timeout = float(timeout)
        self.source = "plugin"
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                text=True, bufsize=1)
        except OSError as exc:
            raise PluginError(f"cannot start plugin {self.command!r}: {exc}") from None
        self._replies: "queue.Queue" = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        try:
            info = self._request({"op": "info"})
            n, n_d = info.get("n"), info.get("n_d")
            if not (isinstance(n, int) and n >= 1 and isinstance(n_d, int) and n_d >= 1):
                raise PluginError(f"plugin info reply has invalid dimensions: {info!r}")
            if not isinstance(info.get("safe_set"), dict):
                raise PluginError("plugin info reply lacks a safe_set description")
            try:
                self.safe_set = SafeSet.from_dict(info["safe_set"])
            except (ConfigError, ValueError) as exc:
                raise PluginError(f"plugin safe set is invalid: {exc}") from None
            if self.safe_set.dim != n:
                raise PluginError("plugin safe set dimension disagrees with n")
        except BaseException:
            self.close()
            raise
        self.n, self.n_d = n, n_d
        self.name = name or str(info.get("name", "plugin"))

    def _read_loop(self):
        for line in self._proc.stdout:
            self._replies.put(line)
        self._replies.put(_EOF)

    def _request(self, payload: dict) -> dict:
        if self._proc.poll() is not None:
            raise PluginError(f"plugin exited with status {self._proc.returncode}")
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise PluginError(f"cannot write to plugin: {exc}") from None
        try:
            line = self._replies.get(timeout=self.timeout)
        except queue.Empty:
            raise PluginError(f"plugin did not answer {payload['op']!r} within {self.timeout:g} s") from None
        if line is _EOF:
            raise PluginError("plugin closed its output stream")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            raise PluginError(f"plugin sent malformed JSON: {line.strip()[:200]!r}") from None
        if not isinstance(reply, dict):
            raise PluginError(f"plugin reply is not a JSON object: {reply!r}")
        if "error" in reply:
            raise PluginError(f"plugin reported an error: {reply['error']}")
        return reply

    def step_batch(self, X, D):
        X = np.asarray(X, dtype=np.float64).reshape(-1, self.n)
        D = np.asarray(D, dtype=np.float64).reshape(-1, self.n_d)
        out = np.empty_like(X)
        for k in range(X.shape[0]):
            reply = self._request({"op": "step", "x": X[k].tolist(), "d": D[k].tolist()})
            out[k] = _float_list(reply.get("x_next"), self.n, "x_next")
        return out

    def sample_d_batch(self, hints):
        hints = np.asarray(hints, dtype=np.uint64).reshape(-1)
        out = np.empty((hints.shape[0], self.n_d))
        for k, h in enumerate(hints):
            reply = self._request({"op": "sample_d", "seed_hint": int(h)})
            out[k] = _float_list(reply.get("d"), self.n_d, "d")
        return out

    def describe(self):
        d = super().describe()
        d["plugin"] = self.command
        return d

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            proc.stdin.close()
            proc.wait(timeout=1.0)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass
