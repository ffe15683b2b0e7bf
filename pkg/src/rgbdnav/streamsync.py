"""Bandwidth-limited delivery of timestamped streams and image/metadata pairing.

Everything is a deterministic discrete-event simulation on the source
clock; no wall-clock time is involved.
"""

from __future__ import annotations

import collections
import heapq
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

KEEP_LATEST = "keep-latest"
KEEP_ALL = "keep-all"


@dataclass(frozen=True)
class TimedMessage:
    stamp: float
    size: float  # megabits
    kind: str = "image"
    payload_id: int = 0

    def __post_init__(self) -> None:
        if not self.size > 0:
            raise ValueError("message size must be positive")


@dataclass(frozen=True)
class ChannelSpec:
    bandwidth: float  # megabits / second
    queue_policy: Literal["keep-latest", "keep-all"] = KEEP_LATEST
    queue_capacity: float = 1

    def __post_init__(self) -> None:
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if self.queue_policy not in (KEEP_LATEST, KEEP_ALL):
            raise ValueError(f"unknown queue policy {self.queue_policy!r}")
        if self.queue_capacity < 1:
            raise ValueError("queue capacity must be at least 1")


@dataclass(frozen=True)
class Delivery:
    message: TimedMessage
    arrival: float

    @property
    def stamp(self) -> float:
        return self.message.stamp


@dataclass(frozen=True)
class Pair:
    metadata: TimedMessage
    image: TimedMessage
    stamp: float
    emitted: float


def make_stream(rate: float, size: float, horizon: float, kind: str = "image", t0: float = 0.0) -> list[TimedMessage]:
    """Messages published at a fixed ``rate`` (Hz) with stamps in ``[t0, horizon)``."""
    if not (rate > 0 and size > 0 and horizon > 0):
        raise ValueError("rate, size and horizon must be positive")
    out = []
    k = 0
    while True:
        stamp = t0 + k / rate
        if stamp >= horizon:
            return out
        out.append(TimedMessage(stamp, size, kind, k))
        k += 1


def transmit(stream: Sequence[TimedMessage], channel: ChannelSpec, horizon: float) -> list[Delivery]:
    """Push a stream through a single serial link.

    A message occupies the link for ``size / bandwidth`` seconds.  Messages
    published while the link is busy wait in the queue; ``keep-latest``
    retains only the newest of them, ``keep-all`` drops the oldest once
    ``queue_capacity`` is exceeded.  Only arrivals at or before ``horizon``
    are returned.
    """
    for a, b in zip(stream, stream[1:]):
        if not b.stamp > a.stamp:
            raise ValueError("stamps must be strictly increasing within a stream")
    capacity = 1 if channel.queue_policy == KEEP_LATEST else channel.queue_capacity
    queue: collections.deque[TimedMessage] = collections.deque()
    delivered = []
    free_at = float("-inf")
    i, n = 0, len(stream)

    def enqueue(msg: TimedMessage) -> None:
        queue.append(msg)
        if len(queue) > capacity:
            queue.popleft()

    while True:
        if not queue:
            if i == n:
                break
            enqueue(stream[i])
            i += 1
        # Everything published by the time the link frees up competes for it.
        while i < n and stream[i].stamp <= free_at:
            enqueue(stream[i])
            i += 1
        msg = queue.popleft()
        free_at = max(free_at, msg.stamp) + msg.size / channel.bandwidth
        if free_at > horizon:
            break
        delivered.append(Delivery(msg, free_at))
    return delivered


class Synchronizer:
    """Online pairing of images with the latest metadata.

    Feed arrivals in order with :meth:`on_metadata` and :meth:`on_image`.
    Each image yields exactly one pair stamped with the image's stamp;
    images arriving before any metadata are held until the first one does.
    """

    def __init__(self) -> None:
        self.latest: TimedMessage | None = None
        self.pending: list[TimedMessage] = []

    def on_metadata(self, msg: TimedMessage, now: float) -> list[Pair]:
        self.latest = msg
        held, self.pending = self.pending, []
        return [Pair(msg, img, img.stamp, now) for img in held]

    def on_image(self, msg: TimedMessage, now: float) -> list[Pair]:
        if self.latest is None:
            self.pending.append(msg)
            return []
        return [Pair(self.latest, msg, msg.stamp, now)]


def _events(metadata: Iterable[Delivery], images: Iterable[Delivery]):
    # Metadata sorts before an image arriving at the same instant.
    events = [(d.arrival, 0, k, d) for k, d in enumerate(metadata)]
    events += [(d.arrival, 1, k, d) for k, d in enumerate(images)]
    heapq.heapify(events)
    while events:
        arrival, kind, _, d = heapq.heappop(events)
        yield arrival, kind, d


def synchronize(metadata: Sequence[Delivery], images: Sequence[Delivery]) -> list[Pair]:
    sync = Synchronizer()
    out: list[Pair] = []
    for arrival, kind, d in _events(metadata, images):
        if kind == 0:
            out.extend(sync.on_metadata(d.message, arrival))
        else:
            out.extend(sync.on_image(d.message, arrival))
    return out


def desync_ratio(metadata: Sequence, images: Sequence) -> float | None:
    """Metadata count over image count; None when no image was delivered."""
    if len(images) == 0:
        return None
    return len(metadata) / len(images)


def delivered_rate(times: Sequence[float], horizon: float | None = None) -> float:
    """Steady-state rate (Hz) from sorted arrival times.

    Uses the mean inter-arrival interval; with fewer than two arrivals it
    falls back to count over ``horizon`` (0.0 without one).
    """
    if len(times) >= 2 and times[-1] > times[0]:
        return (len(times) - 1) / (times[-1] - times[0])
    return len(times) / horizon if horizon else 0.0
