"""Deterministic execution of a bound holarchy.

Commands travel one level down and are dispatched synchronously,
depth-first. Notifications travel one level up and are queued; each
``step`` consumes one queued event and completes the command cascade it
causes. Internal events (timeouts, sensors) only happen when injected.
"""

from __future__ import annotations

import enum
import json
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .compose import Holarchy, Path, format_path, parse_path
from .errors import AmbiguousFiring, CommandNotEnabled, ConformanceError, SimulationError
from .model import (
    ExternalCommand,
    Internal,
    PartNotification,
    PwsSystem,
    StateInterface,
    WholeTransition,
)
from .semantics import SemanticsMap, compute_semantics, format_configuration

log = logging.getLogger(__name__)


class Direction(str, enum.Enum):
    COMMAND_DOWN = "CommandDown"
    NOTIFICATION_UP = "NotificationUp"
    EXTERNAL_IN = "ExternalIn"
    INTERNAL_FIRED = "InternalFired"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    direction: Direction
    path: Path
    event: str

    def line(self) -> str:
        return f"{self.seq}\t{self.direction}\t{format_path(self.path)}\t{self.event}"

    def to_json(self):
        return {"seq": self.seq, "direction": str(self.direction), "path": format_path(self.path), "event": self.event}


class Trace(list):
    """Ordered ``TraceEvent`` list with the tab-separated text form."""

    def text(self) -> str:
        return "".join(e.line() + "\n" for e in self)

    def to_json(self):
        return [e.to_json() for e in self]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True)
class _Injection:
    path: Path
    event: str


@dataclass(frozen=True)
class _Notification:
    emitter: Path
    event: str
    # emitter state the parent's guard sees: the source of an internal
    # move, or the target of a commanded one
    view: str


class Runtime:
    """Mutable run state of one holarchy.

    With ``semantics`` (path -> SemanticsMap) or ``assert_sem`` the
    configuration of every holon is checked against the semantics of its
    current whole state whenever the queue drains.
    """

    def __init__(self, holarchy: Holarchy, semantics: Optional[Mapping[Path, SemanticsMap]] = None,
                 assert_sem: bool = False, trace_injections: bool = False):
        self.holarchy = holarchy
        self.nodes: Dict[Path, object] = dict(holarchy.walk())
        self.state: Dict[Path, str] = {
            path: node.initial for path, node in self.nodes.items()
        }
        self.queue = deque()
        self.trace = Trace()
        self.trace_injections = trace_injections
        if assert_sem and semantics is None:
            semantics = {
                path: compute_semantics(node, holarchy.bindings_for(node))
                for path, node in self.nodes.items() if isinstance(node, PwsSystem)
            }
        self.semantics = semantics

    # -- inspection

    def configuration(self, path: Path = ()) -> Tuple[str, ...]:
        node = self.nodes[path]
        return tuple(self.state[path + (s,)] for s in node.slot_names)

    @property
    def quiescent(self) -> bool:
        return not self.queue

    def _record(self, direction, path, event):
        self.trace.append(TraceEvent(len(self.trace) + 1, direction, path, event))

    def check_conformance(self):
        if not self.semantics:
            return
        for path, sem in self.semantics.items():
            config = self.configuration(path)
            whole = self.state[path]
            if config not in sem[whole]:
                raise ConformanceError(
                    f"holon {format_path(path)} in {whole} has configuration "
                    f"{format_configuration(config)} outside its semantics"
                )

    # -- driving

    def _resolve(self, path) -> Path:
        path = parse_path(path) if isinstance(path, str) else tuple(path)
        if path not in self.nodes:
            raise SimulationError(f"unknown path {format_path(path)}")
        return path

    def inject(self, path, event: str) -> "Runtime":
        """Queue an environment event at a node.

        At a leaf or holon the event must be an internal trigger there; at
        the root holon an external command is accepted as well.
        """
        path = self._resolve(path)
        node = self.nodes[path]
        if isinstance(node, StateInterface):
            known = event in node.internal_events
        else:
            known = any(isinstance(t.trigger, Internal) and t.trigger.event == event for t in node.transitions)
            if not path:
                known = known or any(isinstance(t.trigger, ExternalCommand) and t.trigger.event == event
                                     for t in node.transitions)
        if not known:
            raise SimulationError(f"{event} is not an injectable event at {format_path(path)}")
        self.queue.append(_Injection(path, event))
        return self

    def step(self) -> "Runtime":
        if not self.queue:
            raise SimulationError("step on empty queue")
        item = self.queue.popleft()
        if isinstance(item, _Injection):
            self._injected(item)
        else:
            self._notified(item)
        return self

    def settle(self):
        while self.queue:
            self.step()
        self.check_conformance()

    def run(self, script: Iterable[Tuple[str, str]]) -> Trace:
        for path, event in script:
            self.inject(path, event)
            self.settle()
        return self.trace

    # -- firing

    def _injected(self, item: _Injection):
        path, node = item.path, self.nodes[item.path]
        if isinstance(node, StateInterface):
            t = node.internal(self.state[path], item.event)
            if t is None:
                log.debug("internal %s not enabled at %s", item.event, format_path(path))
                return
            if self.trace_injections:
                self._record(Direction.INTERNAL_FIRED, path, item.event)
            self.state[path] = t.target
            self._emit(path, t.notifies, view=t.source)
            return
        internal = [t for t in self._enabled(path, node, lambda tr: isinstance(tr, Internal) and tr.event == item.event)]
        if internal:
            self._fire_one(path, internal, f"internal {item.event}", Direction.INTERNAL_FIRED, item.event)
            return
        commands = self._enabled(path, node, lambda tr: isinstance(tr, ExternalCommand) and tr.event == item.event)
        if commands:
            self._fire_one(path, commands, f"on {item.event}", Direction.EXTERNAL_IN, item.event)
        elif any(isinstance(t.trigger, ExternalCommand) and t.trigger.event == item.event for t in node.transitions):
            raise CommandNotEnabled(item.event, self.configuration(path), state=self.state[path])
        else:
            log.debug("internal %s not enabled at %s", item.event, format_path(path))

    def _fire_one(self, path, candidates, trigger, direction, event):
        if len(candidates) > 1:
            raise AmbiguousFiring(format_path(path), trigger, [t.id for t in candidates])
        if self.trace_injections:
            self._record(direction, path, event)
        self._fire(path, candidates[0])

    def _notified(self, item: _Notification):
        parent = item.emitter[:-1]
        slot = item.emitter[-1]
        node = self.nodes[parent]
        view = {slot: item.view}
        cands = self._enabled(
            parent, node,
            lambda tr: isinstance(tr, PartNotification) and tr.part == slot and tr.event == item.event,
            view,
        )
        if not cands:
            log.debug("notification %s from %s not handled in %s", item.event,
                      format_path(item.emitter), self.state[parent])
            return
        if len(cands) > 1:
            raise AmbiguousFiring(format_path(parent), f"on {slot}.{item.event}", [t.id for t in cands])
        self._fire(parent, cands[0])

    def _enabled(self, path, node: PwsSystem, trigger_ok, view=None) -> List[WholeTransition]:
        whole = self.state[path]
        config = list(self.configuration(path))
        for slot, q in (view or {}).items():
            config[node.slot_names.index(slot)] = q
        config = tuple(config)
        out = []
        for t in node.transitions:
            if t.source != whole or not trigger_ok(t.trigger):
                continue
            if t.guard is not None and not t.guard.compile(node.slot_names)(config):
                continue
            out.append(t)
        return out

    def _fire(self, path: Path, t: WholeTransition):
        self.state[path] = t.target
        for cmd in t.commands:
            child = path + (cmd.part,)
            self._record(Direction.COMMAND_DOWN, child, cmd.event)
            self._command(child, cmd.event)
        view = t.target if isinstance(t.trigger, ExternalCommand) else t.source
        self._emit(path, t.notifies, view)

    def _command(self, path: Path, event: str):
        node = self.nodes[path]
        if isinstance(node, StateInterface):
            t = node.delta(self.state[path], event)
            if t is None:
                raise CommandNotEnabled(f"{format_path(path)}.{event}", state=self.state[path])
            self.state[path] = t.target
            self._emit(path, t.notifies, view=t.target)
            return
        cands = self._enabled(path, node, lambda tr: isinstance(tr, ExternalCommand) and tr.event == event)
        if not cands:
            raise CommandNotEnabled(f"{format_path(path)}.{event}", self.configuration(path), state=self.state[path])
        if len(cands) > 1:
            raise AmbiguousFiring(format_path(path), f"on {event}", [t.id for t in cands])
        self._fire(path, cands[0])

    def _emit(self, path: Path, notifies, view):
        for n in notifies:
            self._record(Direction.NOTIFICATION_UP, path, n)
            if path:
                self.queue.append(_Notification(path, n, view))


def init_runtime(holarchy: Holarchy, **kwargs) -> Runtime:
    return Runtime(holarchy, **kwargs)


def inject(runtime: Runtime, path, event) -> Runtime:
    return runtime.inject(path, event)


def step(runtime: Runtime) -> Runtime:
    return runtime.step()


def run(runtime: Runtime, script) -> Trace:
    return runtime.run(script)


def parse_script(text: str) -> List[Tuple[str, str]]:
    """One ``path event`` injection per line; ``.`` is the root."""
    script = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SimulationError(f"script line {lineno}: expected 'path event', got {raw!r}")
        script.append((parts[0], parts[1]))
    return script
