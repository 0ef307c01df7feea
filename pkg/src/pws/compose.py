"""Holon boundaries: interface extraction, holarchy binding, and the
product-automaton flattening used as an independent oracle in tests."""

from __future__ import annotations

import hashlib
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .errors import (
    CyclicHolarchy,
    ExtractionAmbiguity,
    FlattenCapExceeded,
    InterfaceMismatch,
    PwsError,
)
from .model import (
    Command,
    ExternalCommand,
    HolarchyDecl,
    Internal,
    InterfaceTransition,
    Model,
    PartNotification,
    PwsSystem,
    StateInterface,
)

Node = Union[PwsSystem, StateInterface]
Path = Tuple[str, ...]

DEFAULT_MAX_PRODUCT = 10**6


def extract_interface(system: PwsSystem) -> StateInterface:
    """Strip guards and command lists, leaving the whole as a part view.

    External commands stay commands. Notification and internal triggers
    become internal events named after their event; a name is qualified
    (``part_event`` or ``self_event``) when it would clash with a command
    or with a different trigger leaving the same state, and suffixed with
    the transition id if it still clashes.
    """
    commands = {}
    for t in system.transitions:
        if isinstance(t.trigger, ExternalCommand):
            commands.setdefault((t.source, t.trigger.event), []).append(t.id)
    for (state, event), ids in commands.items():
        if len(ids) > 1:
            raise ExtractionAmbiguity(state, event, ids)
    command_names = {e for _, e in commands}

    internal = [t for t in system.transitions if not isinstance(t.trigger, ExternalCommand)]
    triggers_by_name: Dict[tuple, set] = {}
    for t in internal:
        triggers_by_name.setdefault((t.source, t.trigger.event), set()).add(t.trigger)

    def qualified(trigger):
        if isinstance(trigger, PartNotification):
            return f"{trigger.part}_{trigger.event}"
        return f"self_{trigger.event}"

    names = {}
    for t in internal:
        base = t.trigger.event
        if base in command_names or len(triggers_by_name[(t.source, base)]) > 1:
            base = qualified(t.trigger)
        names[t.id] = base
    uses = Counter((t.source, names[t.id]) for t in internal)
    for t in internal:
        if uses[(t.source, names[t.id])] > 1 or names[t.id] in command_names:
            names[t.id] = f"{names[t.id]}_{t.id}"

    transitions = []
    for t in system.transitions:
        if isinstance(t.trigger, ExternalCommand):
            trigger = Command(t.trigger.event)
        else:
            trigger = Internal(names[t.id])
        transitions.append(InterfaceTransition(t.id, t.source, t.target, trigger, t.notifies))
    return StateInterface(system.name, system.states, system.initial, tuple(transitions))


def _edges(iface: StateInterface):
    out = []
    for t in iface.transitions:
        if isinstance(t.trigger, Command):
            out.append((t.source, t.target, "on", t.trigger.event, tuple(t.notifies)))
        else:
            # internal event names are private to the holon
            out.append((t.source, t.target, "internal", "", tuple(t.notifies)))
    return Counter(out)


def _edge_str(edge):
    source, target, kind, event, notifies = edge
    label = f"on {event}" if kind == "on" else "internal"
    note = f" notify {' '.join(notifies)}" if notifies else ""
    return f"{source} -> {target} {label}{note}"


def interface_diff(candidate: StateInterface, expected: StateInterface) -> List[str]:
    """Structural differences; empty means the two are isomorphic."""
    diff = []
    have, want = set(candidate.states), set(expected.states)
    diff += [f"missing state {s}" for s in expected.states if s not in have]
    diff += [f"unexpected state {s}" for s in candidate.states if s not in want]
    if candidate.initial != expected.initial:
        diff.append(f"initial state {candidate.initial} instead of {expected.initial}")
    got, need = _edges(candidate), _edges(expected)
    diff += [f"missing transition {_edge_str(e)}" for e in sorted((need - got).elements())]
    diff += [f"unexpected transition {_edge_str(e)}" for e in sorted((got - need).elements())]
    return diff


def isomorphic(a: StateInterface, b: StateInterface) -> bool:
    return not interface_diff(a, b)


def shape_hash(iface: StateInterface) -> str:
    """Hash of what a parent can observe: names of states, the initial
    state, command edges and notifications per edge."""
    data = {
        "states": sorted(iface.states),
        "initial": iface.initial,
        "edges": sorted(list(e) for e in _edges(iface).elements()),
    }
    return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()


def node_interface(node: Node) -> StateInterface:
    return node if isinstance(node, StateInterface) else extract_interface(node)


def parse_path(text: str) -> Path:
    text = text.strip()
    if text in ("", ".", "/"):
        return ()
    return tuple(p for p in text.strip("/").split("/"))


def format_path(path: Path) -> str:
    return "/".join(path) if path else "."


@dataclass
class Holarchy:
    """A tree of systems linked through their part slots.

    Slots without an explicit binding are leaves playing their declared
    interface. ``model`` resolves slot interface names.
    """

    root: Node
    model: Model
    bindings: Dict[Path, Node] = field(default_factory=dict)

    def node(self, path: Path) -> Node:
        node = self.root
        for depth in range(len(path)):
            prefix = path[: depth + 1]
            if prefix in self.bindings:
                node = self.bindings[prefix]
                continue
            if not isinstance(node, PwsSystem):
                raise PwsError(f"{format_path(prefix[:-1])} is a leaf and has no slot {prefix[-1]}")
            slot = node.slot(prefix[-1]) if prefix[-1] in node.slot_names else None
            if slot is None:
                raise PwsError(f"{node.name} has no slot {prefix[-1]}")
            node = self.declared_interface(node, slot.name)
        return node

    def declared_interface(self, system: PwsSystem, slot_name: str) -> StateInterface:
        """The slot's interface with the slot's start state applied."""
        slot = system.slot(slot_name)
        iface = self.model.interface(slot.interface)
        return iface.with_initial(slot.initial_in(iface))

    def children(self, path: Path) -> List[Tuple[str, Node]]:
        node = self.node(path)
        if not isinstance(node, PwsSystem):
            return []
        return [(s, self.node(path + (s,))) for s in node.slot_names]

    def walk(self):
        """Pre-order (path, node) pairs over the whole tree."""
        stack = [()]
        while stack:
            path = stack.pop()
            node = self.node(path)
            yield path, node
            if isinstance(node, PwsSystem):
                stack.extend(path + (s,) for s in reversed(node.slot_names))

    def holons(self) -> List[Tuple[Path, PwsSystem]]:
        return [(p, n) for p, n in self.walk() if isinstance(n, PwsSystem)]

    def bindings_for(self, system: PwsSystem) -> dict:
        return self.model.bindings_for(system)

    def bind(self, path: Path, child: Node) -> "Holarchy":
        """Bind the slot at ``path`` to ``child`` after checking that the
        child's (extracted) interface matches the slot's declaration."""
        path = tuple(path)
        if not path:
            raise PwsError("cannot rebind the root")
        parent = self.node(path[:-1])
        if not isinstance(parent, PwsSystem):
            raise PwsError(f"{format_path(path[:-1])} is a leaf and has no slots")
        if path[-1] not in parent.slot_names:
            raise PwsError(f"{parent.name} has no slot {path[-1]}")
        if isinstance(child, PwsSystem):
            ancestors = [self.node(path[:d]) for d in range(len(path))]
            if any(isinstance(a, PwsSystem) and a.name == child.name for a in ancestors):
                raise CyclicHolarchy(f"cyclic holarchy: {child.name} is an ancestor of {format_path(path)}")
        expected = self.declared_interface(parent, path[-1])
        slot = parent.slot(path[-1])
        candidate = node_interface(child)
        if isinstance(child, StateInterface) and slot.start is not None:
            candidate = candidate.with_initial(slot.start)
        diff = interface_diff(candidate, expected)
        if diff:
            raise InterfaceMismatch(format_path(path), diff)
        if isinstance(child, StateInterface):
            child = candidate
        self.bindings[path] = child
        return self


def bind(parent: Union[PwsSystem, Holarchy], slot: str, child: Node, model: Optional[Model] = None) -> Holarchy:
    """Bind ``slot`` of ``parent`` (a root system or an existing holarchy,
    where ``slot`` may be a ``/`` path) to ``child``."""
    if isinstance(parent, Holarchy):
        return parent.bind(parse_path(slot), child)
    if model is None:
        raise PwsError("binding a bare system needs the model that defines its interfaces")
    return Holarchy(parent, model).bind(parse_path(slot), child)


def build_holarchy(model: Model, decl: Union[HolarchyDecl, str, None] = None, root: Optional[str] = None) -> Holarchy:
    """Holarchy from a declaration, or a root system with leaf parts only."""
    if decl is None:
        if root is None:
            raise PwsError("need a holarchy declaration or a root system")
        if model.has_system(root):
            return Holarchy(model.system(root), model)
        return Holarchy(model.interface(root), model)
    if isinstance(decl, str):
        decl = model.holarchy(decl)
    h = Holarchy(model.system(decl.root), model)
    for b in sorted(decl.bindings, key=lambda b: len(b.path)):
        child = model.system(b.target) if b.kind == "system" else model.interface(b.target)
        h.bind(b.path, child)
    return h


# -- flattening oracle -----------------------------------------------------


def flatten(system: PwsSystem, bindings: Mapping[str, StateInterface], cap: int = DEFAULT_MAX_PRODUCT) -> Dict[str, frozenset]:
    """Explore (whole state, configuration) pairs one at a time.

    Breadth-first over the explicit product; a step is taken for a whole
    transition when its guard holds, its trigger can occur (for a part
    notification: the part has an internal transition emitting it, which
    it takes, or has just reached a command transition's target that emits
    it), and every commanded part accepts its command.
    """
    slots = [s.name for s in system.slots]
    ifaces = [bindings[s] for s in slots]
    position = {s: i for i, s in enumerate(slots)}
    start_config = tuple(s.start if s.start is not None else ifaces[i].initial for i, s in enumerate(system.slots))
    state_sets = [list(i.states) for i in ifaces]
    guards = {t.id: t.guard.elaborate(slots, state_sets) for t in system.transitions if t.guard is not None}

    def successors(w, config):
        for t in system.transitions:
            if t.source != w:
                continue
            if t.id in guards and config not in guards[t.id]:
                continue
            if isinstance(t.trigger, PartNotification):
                i = position[t.trigger.part]
                moved = []
                for it in ifaces[i].transitions:
                    if t.trigger.event not in it.notifies:
                        continue
                    if isinstance(it.trigger, Internal) and it.source == config[i]:
                        moved.append(config[:i] + (it.target,) + config[i + 1:])
                    elif isinstance(it.trigger, Command) and it.target == config[i]:
                        moved.append(config)
            else:
                moved = [config]
            for c in moved:
                c = list(c)
                ok = True
                for cmd in t.commands:
                    i = position[cmd.part]
                    nxt = [it.target for it in ifaces[i].transitions
                           if it.source == c[i] and isinstance(it.trigger, Command) and it.trigger.event == cmd.event]
                    if not nxt:
                        ok = False
                        break
                    c[i] = nxt[0]
                if ok:
                    yield t.target, tuple(c)

    start = (system.initial, start_config)
    seen = {start}
    queue = deque([start])
    while queue:
        w, config = queue.popleft()
        for nxt in successors(w, config):
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > cap:
                    raise FlattenCapExceeded(f"product exploration exceeded {cap} states")
                queue.append(nxt)
    grouped = {s: set() for s in system.states}
    for w, config in seen:
        grouped[w].add(config)
    return {s: frozenset(c) for s, c in grouped.items()}
