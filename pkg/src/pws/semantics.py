"""State semantics of a whole: which assembly configurations are possible
in each of its states.

The computation is a least fixpoint. The initial whole state starts with
the tuple of the parts' initial states; every whole transition ``t`` from
``A`` to ``B`` then contributes

    post(t) = transf(update(feasible(sem(A) & guard, trigger)), commands)

to ``sem(B)``, and ``sem(B)`` is the union of those contributions. The
``feasible``/``update`` step accounts for the part move that produced a
notification trigger; command lists are applied by ``transf``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple

from .errors import CommandNotEnabled, PwsError, UnknownNotification
from .model import (
    Assembly,
    Command,
    CommandAction,
    Configuration,
    Internal,
    PartNotification,
    PwsSystem,
    StateInterface,
    WholeTransition,
)


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # "command-not-enabled" | "unknown-notification"
    transition: str
    message: str
    configuration: Optional[Configuration] = None

    def __str__(self):
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True)
class PreImage:
    transition: str
    configurations: frozenset


@dataclass
class SemanticsMap:
    system: str
    slots: Tuple[str, ...]
    entries: Dict[str, frozenset]
    preimages: Dict[str, frozenset] = field(default_factory=dict)
    diagnostics: List[Diagnostic] = field(default_factory=list)
    iterations: int = 0
    bound: int = 0

    def __getitem__(self, state) -> frozenset:
        return self.entries[state]

    def __iter__(self):
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    @property
    def arity(self) -> int:
        return len(self.slots)

    def unreachable(self) -> List[str]:
        return [s for s, configs in self.entries.items() if not configs]

    def configuration_count(self) -> int:
        return sum(len(c) for c in self.entries.values())

    def as_sets(self) -> Dict[str, set]:
        return {s: set(c) for s, c in self.entries.items()}

    def dump(self) -> str:
        return "".join(f"{s}: {format_proposition(c)}\n" for s, c in self.entries.items())

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "slots": list(self.slots),
            "semantics": {s: [list(c) for c in sorted(cs)] for s, cs in self.entries.items()},
        }


def format_configuration(config) -> str:
    return "(" + ",".join(config) + ")"


def format_proposition(prop) -> str:
    return "{" + ", ".join(format_configuration(c) for c in sorted(prop)) + "}"


def initial_configuration(system: PwsSystem, bindings: Mapping[str, StateInterface]) -> Configuration:
    return Assembly(system, bindings).initial


def _assembly(system_or_assembly, bindings=None) -> Assembly:
    if isinstance(system_or_assembly, Assembly):
        return system_or_assembly
    return Assembly(system_or_assembly, bindings or {})


def apply_commands(config: Configuration, commands: Iterable[CommandAction], asm: Assembly,
                   transition: Optional[str] = None) -> Configuration:
    out = list(config)
    for cmd in commands:
        i = asm.index[cmd.part]
        step = asm.interfaces[i].delta(out[i], cmd.event)
        if step is None:
            raise CommandNotEnabled(str(cmd), config, transition, out[i])
        out[i] = step.target
    return tuple(out)


def transf(prop, commands: Iterable[CommandAction], asm: Assembly, transition=None) -> frozenset:
    """Apply a command list to every configuration of ``prop``.

    Raises ``CommandNotEnabled`` on the first configuration where some
    commanded part has no transition for the command.
    """
    commands = tuple(commands)
    if not commands:
        return frozenset(prop)
    return frozenset(apply_commands(c, commands, asm, transition) for c in prop)


def _notification_moves(iface: StateInterface, event: str):
    """Map part state -> successor states for a notification trigger.

    An internal transition emitting ``event`` moves the part across it.
    A command transition emitting ``event`` is a reply to the whole's own
    command: the part already sits in its target, so it stays there.
    """
    moves: Dict[str, set] = {}
    for t in iface.transitions:
        if event not in t.notifies:
            continue
        if isinstance(t.trigger, Internal):
            moves.setdefault(t.source, set()).add(t.target)
        elif isinstance(t.trigger, Command):
            moves.setdefault(t.target, set()).add(t.target)
    return moves


def _identity(config):
    return (config,)


def trigger_feasible(prop, trigger, asm: Assembly) -> Tuple[frozenset, Callable]:
    """Split a trigger into a configuration filter and a part update.

    Returns the configurations of ``prop`` from which the trigger can occur
    and a function mapping each of them to its successor configurations.
    ExternalCommand and Internal triggers keep everything and move nothing.
    """
    if not isinstance(trigger, PartNotification):
        return frozenset(prop), _identity
    i = asm.index[trigger.part]
    iface = asm.interfaces[i]
    if trigger.event not in iface.notification_events:
        raise UnknownNotification(trigger.part, trigger.event)
    moves = _notification_moves(iface, trigger.event)

    def update(config):
        return tuple(config[:i] + (q,) + config[i + 1:] for q in sorted(moves.get(config[i], ())))

    return frozenset(c for c in prop if c[i] in moves), update


def _guarded(prop, t: WholeTransition, asm: Assembly):
    if t.guard is None:
        return prop
    matches = t.guard.compile(asm.slots)
    return frozenset(c for c in prop if matches(c))


def _fire(t: WholeTransition, sem_a, asm: Assembly, diagnostics: Optional[list]):
    """Pre-image and image of ``t``; collects or raises diagnostics."""
    try:
        kept, update = trigger_feasible(_guarded(sem_a, t, asm), t.trigger, asm)
    except UnknownNotification as exc:
        if diagnostics is None:
            raise UnknownNotification(exc.part, exc.event, t.id) from None
        diagnostics.append(Diagnostic("unknown-notification", t.id, f"{t.id}: {exc}"))
        return frozenset(), frozenset()
    fired, image = set(), set()
    for config in sorted(kept):
        for moved in update(config):
            try:
                image.add(apply_commands(moved, t.commands, asm, t.id))
            except CommandNotEnabled as exc:
                if diagnostics is None:
                    raise
                diagnostics.append(Diagnostic("command-not-enabled", t.id, str(exc), config))
                continue
            fired.add(config)
    return frozenset(fired), frozenset(image)


def preimage(t: WholeTransition, sem_a, asm: Assembly) -> PreImage:
    return PreImage(t.id, _fire(t, sem_a, asm, [])[0])


def post(t: WholeTransition, sem_a, asm: Assembly) -> frozenset:
    """Configurations reached in ``t.target`` by firing ``t`` from ``sem_a``."""
    return _fire(t, frozenset(sem_a), asm, None)[1]


def compute_semantics(system: PwsSystem, bindings: Mapping[str, StateInterface]) -> SemanticsMap:
    """Least solution of the union constraints over the whole graph.

    Worklist iteration: each pop processes only the configurations that
    arrived at a state since it was last processed (post distributes over
    union). Unreachable whole states map to the empty set. Command and
    notification problems become diagnostics; offending configurations are
    dropped and the rest of the map is still computed.
    """
    asm = Assembly(system, bindings)
    outgoing: Dict[str, List[WholeTransition]] = {s: [] for s in system.states}
    for t in system.transitions:
        outgoing.setdefault(t.source, []).append(t)

    sem: Dict[str, set] = {s: set() for s in system.states}
    pre: Dict[str, set] = {t.id: set() for t in system.transitions}
    pending: Dict[str, set] = {s: set() for s in system.states}
    diagnostics: List[Diagnostic] = []
    seen_diag = set()

    sem[system.initial].add(asm.initial)
    pending[system.initial].add(asm.initial)
    worklist = deque([system.initial])
    queued = {system.initial}
    iterations = 0
    bound = len(system.states) * asm.size() + 1

    while worklist:
        state = worklist.popleft()
        queued.discard(state)
        iterations += 1
        delta = frozenset(pending[state])
        pending[state] = set()
        for t in outgoing[state]:
            local: List[Diagnostic] = []
            fired, image = _fire(t, delta, asm, local)
            for d in local:
                key = (d.kind, d.transition, d.configuration, d.message)
                if key not in seen_diag:
                    seen_diag.add(key)
                    diagnostics.append(d)
            pre[t.id] |= fired
            fresh = image - sem[t.target]
            if fresh:
                sem[t.target] |= fresh
                pending[t.target] |= fresh
                if t.target not in queued:
                    queued.add(t.target)
                    worklist.append(t.target)

    if iterations > bound:  # cannot happen: every push follows growth of some sem(S)
        raise PwsError(f"fixpoint exceeded its iteration bound ({iterations} > {bound})")
    return SemanticsMap(
        system=system.name,
        slots=asm.slots,
        entries={s: frozenset(sem[s]) for s in system.states},
        preimages={tid: frozenset(c) for tid, c in pre.items()},
        diagnostics=diagnostics,
        iterations=iterations,
        bound=bound,
    )
