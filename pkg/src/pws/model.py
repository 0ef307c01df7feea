"""Core domain types for Part-Whole Statecharts.

A *state interface* is a flat machine exposing command-triggered and
internal transitions together with the notifications they emit. A
*system* couples a controlling whole automaton with an ordered assembly
of part slots, each typed by an interface. Parts never reference each
other: the whole is the only place where their behaviours meet.

Configurations are plain tuples of state names, position ``i`` bound to
the ``i``-th declared slot; a state proposition is a ``frozenset`` of
configurations.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

from .errors import ModelError, UnboundSlot

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

Configuration = Tuple[str, ...]
StateProposition = frozenset  # frozenset[Configuration]


def is_identifier(name) -> bool:
    return isinstance(name, str) and IDENT_RE.match(name) is not None


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


def _span():
    return field(default=None, compare=False, repr=False)


# Triggers. Interfaces use Command/Internal, wholes use
# ExternalCommand/PartNotification/Internal.


@dataclass(frozen=True)
class Command:
    event: str

    def __str__(self):
        return f"on {self.event}"


@dataclass(frozen=True)
class Internal:
    event: str

    def __str__(self):
        return f"internal {self.event}"


@dataclass(frozen=True)
class ExternalCommand:
    event: str

    def __str__(self):
        return f"on {self.event}"


@dataclass(frozen=True)
class PartNotification:
    part: str
    event: str

    def __str__(self):
        return f"on {self.part}.{self.event}"


InterfaceTrigger = Union[Command, Internal]
WholeTrigger = Union[ExternalCommand, PartNotification, Internal]


@dataclass(frozen=True)
class InterfaceTransition:
    id: str
    source: str
    target: str
    trigger: InterfaceTrigger
    notifies: Tuple[str, ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class StateInterface:
    name: str
    states: Tuple[str, ...]
    initial: str
    transitions: Tuple[InterfaceTransition, ...] = ()
    span: Optional[Span] = _span()

    @cached_property
    def _by_command(self):
        index = {}
        for t in self.transitions:
            if isinstance(t.trigger, Command):
                index.setdefault((t.source, t.trigger.event), t)
        return index

    def delta(self, state: str, event: str) -> Optional[InterfaceTransition]:
        """The transition taken from ``state`` on command ``event``, if any."""
        return self._by_command.get((state, event))

    def internal(self, state: str, event: str) -> Optional[InterfaceTransition]:
        for t in self.transitions:
            if t.source == state and isinstance(t.trigger, Internal) and t.trigger.event == event:
                return t
        return None

    @cached_property
    def command_events(self) -> frozenset:
        return frozenset(e for _, e in self._by_command)

    @cached_property
    def internal_events(self) -> frozenset:
        return frozenset(t.trigger.event for t in self.transitions if isinstance(t.trigger, Internal))

    @cached_property
    def notification_events(self) -> frozenset:
        return frozenset(n for t in self.transitions for n in t.notifies)

    def with_initial(self, initial: str) -> "StateInterface":
        if initial == self.initial:
            return self
        return replace(self, initial=initial)


@dataclass(frozen=True)
class CommandAction:
    part: str
    event: str

    def __str__(self):
        return f"{self.part}.{self.event}"


Atom = Tuple[str, str]  # (slot, state)


@dataclass(frozen=True)
class Pattern:
    """Disjunction of conjunctions of ``slot=state`` atoms.

    Wildcard atoms are dropped on construction, so an empty conjunction
    matches every configuration and a pattern with no alternatives
    matches none.
    """

    alternatives: Tuple[Tuple[Atom, ...], ...]

    @classmethod
    def of(cls, *alternatives: Mapping[str, str]) -> "Pattern":
        return cls(tuple(tuple((k, v) for k, v in alt.items() if v != "*") for alt in alternatives))

    def atoms(self) -> Iterator[Atom]:
        for alt in self.alternatives:
            yield from alt

    def compile(self, slots: Sequence[str]):
        index = {s: i for i, s in enumerate(slots)}
        alts = [tuple((index[s], q) for s, q in alt) for alt in self.alternatives]

        def matches(config) -> bool:
            return any(all(config[i] == q for i, q in alt) for alt in alts)

        return matches

    def elaborate(self, slots: Sequence[str], state_sets: Sequence[Sequence[str]]) -> frozenset:
        """Explicit set of configurations satisfying the pattern."""
        matches = self.compile(slots)
        return frozenset(c for c in itertools.product(*state_sets) if matches(c))

    def __str__(self):
        return " | ".join(", ".join(f"{s}={q}" for s, q in alt) or "*" for alt in self.alternatives)


@dataclass(frozen=True)
class WholeTransition:
    id: str
    source: str
    target: str
    trigger: WholeTrigger
    guard: Optional[Pattern] = None
    commands: Tuple[CommandAction, ...] = ()
    notifies: Tuple[str, ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Slot:
    name: str
    interface: str
    start: Optional[str] = None  # overrides the interface's initial state
    span: Optional[Span] = _span()

    def initial_in(self, iface: StateInterface) -> str:
        return self.start if self.start is not None else iface.initial


@dataclass(frozen=True)
class PwsSystem:
    name: str
    states: Tuple[str, ...]
    initial: str
    transitions: Tuple[WholeTransition, ...] = ()
    slots: Tuple[Slot, ...] = ()
    span: Optional[Span] = _span()

    @property
    def slot_names(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.slots)

    def slot(self, name: str) -> Slot:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(name)

    def outgoing(self, state: str):
        return [t for t in self.transitions if t.source == state]


@dataclass(frozen=True)
class Binding:
    path: Tuple[str, ...]
    kind: str  # "system" | "interface"
    target: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class HolarchyDecl:
    name: str
    root: str
    bindings: Tuple[Binding, ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Model:
    """A parsed collection of declarations.

    Interfaces, systems and holarchies live in separate namespaces, so an
    extracted interface may share its name with the system it came from.
    """

    interfaces: Tuple[StateInterface, ...] = ()
    systems: Tuple[PwsSystem, ...] = ()
    holarchies: Tuple[HolarchyDecl, ...] = ()

    @cached_property
    def _interfaces(self):
        return {i.name: i for i in self.interfaces}

    @cached_property
    def _systems(self):
        return {s.name: s for s in self.systems}

    @cached_property
    def _holarchies(self):
        return {h.name: h for h in self.holarchies}

    def interface(self, name: str) -> StateInterface:
        return self._interfaces[name]

    def system(self, name: str) -> PwsSystem:
        return self._systems[name]

    def holarchy(self, name: str) -> HolarchyDecl:
        return self._holarchies[name]

    def has_interface(self, name):
        return name in self._interfaces

    def has_system(self, name):
        return name in self._systems

    def bindings_for(self, system: PwsSystem) -> dict:
        """Slot name to declared interface, the part view used by analysis."""
        out = {}
        for slot in system.slots:
            if slot.interface not in self._interfaces:
                raise UnboundSlot(f"slot {slot.name} of {system.name}: unknown interface {slot.interface}")
            out[slot.name] = self._interfaces[slot.interface]
        return out

    def merge(self, *others: "Model") -> "Model":
        models = (self,) + others
        return Model(
            tuple(itertools.chain.from_iterable(m.interfaces for m in models)),
            tuple(itertools.chain.from_iterable(m.systems for m in models)),
            tuple(itertools.chain.from_iterable(m.holarchies for m in models)),
        )


class Assembly:
    """The ordered parts of one system, resolved against their interfaces."""

    def __init__(self, system: PwsSystem, bindings: Mapping[str, StateInterface]):
        self.system = system
        self.slots = system.slot_names
        ifaces = []
        for slot in system.slots:
            if slot.name not in bindings:
                raise UnboundSlot(f"slot {slot.name} of {system.name} is unbound")
            ifaces.append(bindings[slot.name])
        self.interfaces = tuple(ifaces)
        self.index = {s: i for i, s in enumerate(self.slots)}
        self.initial = tuple(slot.initial_in(i) for slot, i in zip(system.slots, self.interfaces))

    @property
    def arity(self):
        return len(self.slots)

    def size(self) -> int:
        n = 1
        for iface in self.interfaces:
            n *= len(iface.states)
        return n


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    span: Optional[Span] = None

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.code}: {self.message}"


def _check_ident(name, what, span, out):
    if not is_identifier(name):
        out.append(Violation("bad-identifier", f"{what} {name!r} is not an identifier", span))


def _duplicates(items: Iterable[str]):
    seen, dups = set(), []
    for x in items:
        if x in seen and x not in dups:
            dups.append(x)
        seen.add(x)
    return dups


def validate_interface(iface: StateInterface) -> list:
    out = []
    span = iface.span
    _check_ident(iface.name, "interface name", span, out)
    for s in iface.states:
        _check_ident(s, "state", span, out)
    for d in _duplicates(iface.states):
        out.append(Violation("duplicate-state", f"state {d} declared twice in {iface.name}", span))
    if not iface.states:
        out.append(Violation("no-states", f"interface {iface.name} declares no states", span))
    if iface.initial not in iface.states:
        out.append(Violation("initial-not-declared", f"initial state {iface.initial} of {iface.name} is not declared", span))
    for d in _duplicates(t.id for t in iface.transitions):
        out.append(Violation("duplicate-transition", f"transition id {d} used twice in {iface.name}", span))
    states = set(iface.states)
    seen_cmd, seen_int = {}, {}
    for t in iface.transitions:
        tspan = t.span or span
        for end in (t.source, t.target):
            if end not in states:
                out.append(Violation("unknown-state", f"{iface.name}.{t.id} refers to undeclared state {end}", tspan))
        if isinstance(t.trigger, Command):
            key, seen, code = (t.source, t.trigger.event), seen_cmd, "nondeterministic-command"
        elif isinstance(t.trigger, Internal):
            key, seen, code = (t.source, t.trigger.event), seen_int, "nondeterministic-internal"
        else:
            out.append(Violation("bad-trigger", f"{iface.name}.{t.id} has a whole-level trigger", tspan))
            continue
        _check_ident(t.trigger.event, "event", tspan, out)
        for n in t.notifies:
            _check_ident(n, "notification", tspan, out)
        if key in seen:
            out.append(Violation(code, f"{iface.name}: {seen[key]} and {t.id} both leave {key[0]} on {key[1]}", tspan))
        else:
            seen[key] = t.id
    return out


def validate_system(system: PwsSystem, interfaces: Mapping[str, StateInterface]) -> list:
    out = []
    span = system.span
    _check_ident(system.name, "system name", span, out)
    for d in _duplicates(system.states):
        out.append(Violation("duplicate-state", f"whole state {d} declared twice in {system.name}", span))
    if not system.states:
        out.append(Violation("no-states", f"system {system.name} declares no whole states", span))
    if system.initial not in system.states:
        out.append(Violation("initial-not-declared", f"initial whole state {system.initial} of {system.name} is not declared", span))
    for d in _duplicates(s.name for s in system.slots):
        out.append(Violation("duplicate-slot", f"slot {d} declared twice in {system.name}", span))
    for d in _duplicates(t.id for t in system.transitions):
        out.append(Violation("duplicate-transition", f"transition id {d} used twice in {system.name}", span))

    slot_iface = {}
    for slot in system.slots:
        _check_ident(slot.name, "slot", slot.span or span, out)
        iface = interfaces.get(slot.interface)
        if iface is None:
            out.append(Violation("unknown-interface", f"slot {slot.name} of {system.name} uses undefined interface {slot.interface}", slot.span or span))
            continue
        slot_iface[slot.name] = iface
        if slot.start is not None and slot.start not in iface.states:
            out.append(Violation("unknown-state", f"slot {slot.name} starts in {slot.start}, not a state of {iface.name}", slot.span or span))

    def check_part(part, tspan, what):
        # Only slots of this very assembly can be addressed; this is the
        # whole of the no-part-to-part rule, since parts carry no references.
        if part not in slot_iface and part not in system.slot_names:
            out.append(Violation("unknown-slot", f"{what} refers to undeclared slot {part}", tspan))
            return None
        return slot_iface.get(part)

    states = set(system.states)
    for t in system.transitions:
        tspan = t.span or span
        what = f"{system.name}.{t.id}"
        for end in (t.source, t.target):
            if end not in states:
                out.append(Violation("unknown-state", f"{what} refers to undeclared whole state {end}", tspan))
        trig = t.trigger
        if isinstance(trig, PartNotification):
            iface = check_part(trig.part, tspan, what)
            if iface is not None and trig.event not in iface.notification_events:
                out.append(Violation("unknown-notification", f"{what}: {trig.part} ({iface.name}) never notifies {trig.event}", tspan))
        elif not isinstance(trig, (ExternalCommand, Internal)):
            out.append(Violation("bad-trigger", f"{what} has an interface-level trigger", tspan))
        if t.guard is not None:
            for part, q in t.guard.atoms():
                iface = check_part(part, tspan, f"{what} guard")
                if iface is not None and q not in iface.states:
                    out.append(Violation("unknown-state", f"{what} guard: {q} is not a state of {part} ({iface.name})", tspan))
        for d in _duplicates(c.part for c in t.commands):
            out.append(Violation("duplicate-command-slot", f"{what} commands slot {d} more than once", tspan))
        for c in t.commands:
            iface = check_part(c.part, tspan, f"{what} command")
            if iface is not None and c.event not in iface.command_events:
                out.append(Violation("unknown-command", f"{what}: {c.event} is not a command of {c.part} ({iface.name})", tspan))
    return out


def validate_model(model: Model) -> list:
    """Return the list of structural violations; empty means valid."""
    out = []
    for d in _duplicates(i.name for i in model.interfaces):
        out.append(Violation("duplicate-name", f"interface {d} defined more than once"))
    for d in _duplicates(s.name for s in model.systems):
        out.append(Violation("duplicate-name", f"system {d} defined more than once"))
    for d in _duplicates(h.name for h in model.holarchies):
        out.append(Violation("duplicate-name", f"holarchy {d} defined more than once"))
    ifaces = {i.name: i for i in model.interfaces}
    for iface in model.interfaces:
        out.extend(validate_interface(iface))
    for system in model.systems:
        out.extend(validate_system(system, ifaces))
    systems = {s.name: s for s in model.systems}
    for h in model.holarchies:
        if h.root not in systems:
            out.append(Violation("unknown-system", f"holarchy {h.name} has undefined root {h.root}", h.span))
        for b in h.bindings:
            pool = systems if b.kind == "system" else ifaces
            if b.target not in pool:
                out.append(Violation(f"unknown-{b.kind}", f"holarchy {h.name} binds {'/'.join(b.path)} to undefined {b.kind} {b.target}", b.span or h.span))
        for d in _duplicates("/".join(b.path) for b in h.bindings):
            out.append(Violation("duplicate-binding", f"holarchy {h.name} binds {d} twice", h.span))
    return out


def ensure_valid(model: Model) -> Model:
    violations = validate_model(model)
    if violations:
        raise ModelError(violations)
    return model
