"""Contextual word embeddings: provider contract, built-in provider, client.

A provider maps (sentence, focus position) to a fixed-dimension vector that
depends only on the tokens AROUND the focus position, never on the focus
token itself. That masked contract is what lets truly novel words be placed
by the context alone.

The built-in provider needs no external model: each neighbor token is hashed
to a unit vector (bucketed by adjacent/distant) and neighbors are summed with
1/distance weights inside a fixed window. External providers speak a
line-delimited JSON protocol over TCP or a subprocess's stdio; see
ExternalProvider.
"""

import hashlib
import json
import shlex
import socket
import subprocess
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from .corpus import Sentence
from .errors import DataError, DimensionMismatchError, TransportError


@dataclass(frozen=True)
class ContextQuery:
    sentence: Sentence
    position: int

    def __post_init__(self):
        if not 0 <= self.position < len(self.sentence):
            raise DataError(
                f"position {self.position} out of range for sentence of "
                f"length {len(self.sentence)}"
            )


class ContextVector:
    """Provider output with its Euclidean norm cached."""

    __slots__ = ("values", "norm")

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)
        self.norm = float(np.linalg.norm(self.values))

    def __len__(self):
        return self.values.shape[0]


def cosine(a: ContextVector, b: ContextVector) -> float:
    """dot(a,b) / (|a||b|); zero-norm inputs yield 0 with a warning."""
    if len(a) != len(b):
        raise DimensionMismatchError(f"cosine over dimensions {len(a)} != {len(b)}")
    if a.norm == 0.0 or b.norm == 0.0:
        warnings.warn("cosine of a zero-norm context vector, treating as 0")
        return 0.0
    return float(np.dot(a.values, b.values) / (a.norm * b.norm))


def embed_context(provider, query: ContextQuery) -> ContextVector:
    vector = provider.embed(query)
    if len(vector) != provider.dim:
        raise DimensionMismatchError(
            f"provider {provider.name} declared dim {provider.dim}, "
            f"returned {len(vector)}"
        )
    return vector


class BuiltinProvider:
    """Deterministic hash-projection context encoder.

    For focus position i:  v = sum over j != i, |j-i| <= window of
    (1/|j-i|) * unit_vector(token_j, adjacent if |j-i| <= 1 else distant).
    Token vectors come from seeded hashes, so equal contexts give bitwise
    equal vectors and shared neighbors give high cosine.
    """

    def __init__(self, dim: int = 256, window: int = 5, seed: int = 0):
        self.dim = dim
        self.window = window
        self.seed = seed
        self.name = f"builtin-hash-{dim}"
        self._units: dict[tuple[str, str], np.ndarray] = {}

    def _unit(self, token: str, bucket: str) -> np.ndarray:
        key = (token, bucket)
        cached = self._units.get(key)
        if cached is not None:
            return cached
        digest = hashlib.blake2b(
            f"{self.seed}\x1f{bucket}\x1f{token}".encode("utf-8"), digest_size=16
        ).digest()
        rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "big")))
        vec = rng.standard_normal(self.dim)
        vec /= np.linalg.norm(vec)
        self._units[key] = vec
        return vec

    def embed(self, query: ContextQuery) -> ContextVector:
        tokens = query.sentence.tokens
        i = query.position
        acc = np.zeros(self.dim)
        for j in range(max(0, i - self.window), min(len(tokens), i + self.window + 1)):
            if j == i:
                continue
            dist = abs(j - i)
            bucket = "adjacent" if dist <= 1 else "distant"
            acc += (1.0 / dist) * self._unit(tokens[j], bucket)
        return ContextVector(acc)


class _LineTransport:
    def readline(self) -> str:
        raise NotImplementedError

    def writeline(self, line: str) -> None:
        raise NotImplementedError

    def close(self) -> None:
        pass


class _TcpTransport(_LineTransport):
    def __init__(self, host: str, port: int):
        try:
            self._sock = socket.create_connection((host, port), timeout=30)
        except OSError as e:
            raise TransportError(f"cannot connect to provider at {host}:{port}: {e}") from e
        self._reader = self._sock.makefile("r", encoding="utf-8", newline="\n")

    def readline(self) -> str:
        try:
            line = self._reader.readline()
        except OSError as e:
            raise TransportError(f"provider read failed: {e}") from e
        if line == "":
            raise TransportError("provider closed the connection")
        return line

    def writeline(self, line: str) -> None:
        try:
            self._sock.sendall((line + "\n").encode("utf-8"))
        except OSError as e:
            raise TransportError(f"provider write failed: {e}") from e

    def close(self) -> None:
        try:
            self._reader.close()
            self._sock.close()
        except OSError:
            pass


class _StdioTransport(_LineTransport):
    def __init__(self, command: str):
        try:
            self._proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, encoding="utf-8", bufsize=1)
        except OSError as e:
            raise TransportError(f"cannot start provider command {command!r}: {e}") from e

    def readline(self) -> str:
        line = self._proc.stdout.readline()
        if line == "":
            raise TransportError("provider process closed stdout")
        return line

    def writeline(self, line: str) -> None:
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (OSError, ValueError) as e:
            raise TransportError(f"provider write failed: {e}") from e

    def close(self) -> None:
        try:
            self._proc.stdin.close()
            self._proc.terminate()
            self._proc.wait(timeout=10)
        except (OSError, subprocess.TimeoutExpired):
            self._proc.kill()


class ExternalProvider:
    """Client for the line-delimited JSON embedding protocol.

    Address forms: "host:port" (TCP) or "stdio:<command>" (subprocess).
    Handshake: the first server line declares {"dim": int, "name": str} plus
    optional metadata (e.g. a truncation policy). Per request, one line
    {"tokens": [...], "position": int} is answered by {"vector": [...]} or
    {"error": "..."}. Requests on one connection are serialized.
    """

    def __init__(self, address: str, retries: int = 1):
        self.address = address
        self.retries = retries
        self._lock = threading.Lock()
        self._transport = None
        self.dim = None
        self.name = None
        self.metadata: dict = {}

    def _connect(self) -> None:
        if self.address.startswith("stdio:"):
            transport = _StdioTransport(self.address[len("stdio:"):])
        else:
            host, sep, port = self.address.rpartition(":")
            if not sep or not port.isdigit():
                raise TransportError(f"bad provider address {self.address!r}")
            transport = _TcpTransport(host or "127.0.0.1", int(port))
        handshake = self._parse(transport.readline())
        if not isinstance(handshake.get("dim"), int) or handshake["dim"] < 1:
            transport.close()
            raise TransportError(f"bad handshake from provider: {handshake!r}")
        declared = handshake["dim"]
        if self.dim is not None and declared != self.dim:
            transport.close()
            raise DimensionMismatchError(
                f"provider reconnected with dim {declared}, previously {self.dim}")
        self.dim = declared
        self.name = str(handshake.get("name", self.address))
        self.metadata = {k: v for k, v in handshake.items() if k not in ("dim", "name")}
        self._transport = transport

    @staticmethod
    def _parse(line: str) -> dict:
        try:
            message = json.loads(line)
        except json.JSONDecodeError as e:
            raise TransportError(f"provider sent invalid JSON: {line!r}") from e
        if not isinstance(message, dict):
            raise TransportError(f"provider sent a non-object message: {line!r}")
        return message

    def _request_once(self, query: ContextQuery) -> ContextVector:
        if self._transport is None:
            self._connect()
        request = json.dumps(
            {"tokens": list(query.sentence.tokens), "position": query.position})
        self._transport.writeline(request)
        response = self._parse(self._transport.readline())
        if "error" in response:
            raise DataError(f"provider rejected request: {response['error']}")
        vector = response.get("vector")
        if not isinstance(vector, list):
            raise TransportError(f"provider response missing vector: {response!r}")
        if len(vector) != self.dim:
            raise DimensionMismatchError(
                f"provider {self.name} declared dim {self.dim}, sent {len(vector)}")
        return ContextVector(vector)

    def embed(self, query: ContextQuery) -> ContextVector:
        with self._lock:
            attempts = self.retries + 1
            for attempt in range(attempts):
                try:
                    return self._request_once(query)
                except TransportError:
                    self._drop()
                    if attempt == attempts - 1:
                        raise

    def _drop(self) -> None:
        if self._transport is not None:
            self._transport.close()
            self._transport = None

    def close(self) -> None:
        with self._lock:
            self._drop()
