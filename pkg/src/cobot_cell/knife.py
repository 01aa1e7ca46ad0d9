"""Instrumented-knife force stream: threshold calibration and hard-contact
classification with debounce.

Force is the normal force on the blade-mount sensor in pounds-force, sensor
range 0-25 lbf. Contact detection is terminal: one event ends the stream
classification, mirroring the e-stop that ends an execution episode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

SENSOR_MAX_LBF = 25.0


@dataclass(frozen=True)
class ForceSample:
    t: float
    force: float

    def __post_init__(self):
        if self.force < 0:
            raise ValueError("negative force")


@dataclass(frozen=True)
class ForceThreshold:
    """Hard-contact threshold: calibrated base force, safety margin fraction,
    and the number of consecutive samples required to latch a contact."""

    base: float
    margin: float
    debounce: int = 2

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if self.debounce < 1:
            raise ValueError("debounce must be >= 1")
        if self.effective > SENSOR_MAX_LBF:
            raise ValueError("margin saturates sensor")
        if self.effective <= 0:
            raise ValueError("threshold must be positive")

    @property
    def effective(self) -> float:
        return self.base * (1.0 + self.margin)


@dataclass(frozen=True)
class ContactEvent:
    """First debounce-satisfying run of at-or-above-threshold samples.

    t_detect is the timestamp of the run's last sample; peak is the largest
    force within the run.
    """

    t_detect: float
    peak: float


def calibrate_threshold(
    normal_traces: Sequence[Sequence[ForceSample]],
    margin: float,
    debounce: int = 2,
) -> ForceThreshold:
    """Base = maximum force seen across all normal-cutting traces, then a
    relative safety margin on top."""
    samples = [s for trace in normal_traces for s in trace]
    if not samples:
        raise ValueError("no calibration data")
    base = max(s.force for s in samples)
    return ForceThreshold(base=base, margin=margin, debounce=debounce)


@dataclass
class ContactClassifier:
    """Streaming classifier; feed samples in time order via push().

    Latches after emitting one event: further samples are ignored.
    """

    threshold: ForceThreshold
    _run: list[ForceSample] = field(default_factory=list, init=False)
    _event: Optional[ContactEvent] = field(default=None, init=False)
    _last_t: Optional[float] = field(default=None, init=False)

    def push(self, sample: ForceSample) -> Optional[ContactEvent]:
        if self._event is not None:
            return None
        if self._last_t is not None and sample.t <= self._last_t:
            raise ValueError("non-increasing sample time")
        self._last_t = sample.t
        if sample.force >= self.threshold.effective:
            self._run.append(sample)
            if len(self._run) >= self.threshold.debounce:
                self._event = ContactEvent(
                    t_detect=sample.t,
                    peak=max(s.force for s in self._run),
                )
                return self._event
        else:
            self._run.clear()
        return None

    @property
    def fired(self) -> Optional[ContactEvent]:
        return self._event


def classify_contact(
    stream: Iterable[ForceSample], th: ForceThreshold
) -> Optional[ContactEvent]:
    """Batch form: first ContactEvent in the stream, or None."""
    clf = ContactClassifier(th)
    for sample in stream:
        ev = clf.push(sample)
        if ev is not None:
            return ev
    return None
