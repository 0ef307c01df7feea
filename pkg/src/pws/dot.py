"""Graphviz rendering of whole automata and state interfaces."""

from __future__ import annotations

from typing import Optional

from .dsl import format_guard
from .model import Command, ExternalCommand, PartNotification, PwsSystem, StateInterface
from .semantics import SemanticsMap, format_proposition


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _node(name, label, initial):
    shape = "doublecircle" if initial else "circle"
    return f"  {_quote(name)} [shape={shape}, label={_quote(label)}];"


def system_dot(system: PwsSystem, sem: Optional[SemanticsMap] = None) -> str:
    lines = [f"digraph {_quote(system.name)} {{", "  rankdir=LR;"]
    for s in system.states:
        label = s if sem is None else f"{s}\n{format_proposition(sem[s])}"
        lines.append(_node(s, label, s == system.initial))
    for t in system.transitions:
        trig = t.trigger
        if isinstance(trig, PartNotification):
            label = f"{trig.part}.{trig.event}"
        elif isinstance(trig, ExternalCommand):
            label = trig.event
        else:
            label = f"internal {trig.event}"
        if t.guard is not None:
            label += " " + format_guard(t.guard)
        if t.commands:
            label += " / " + ", ".join(str(c) for c in t.commands)
        if t.notifies:
            label += " ^" + " ^".join(t.notifies)
        lines.append(f"  {_quote(t.source)} -> {_quote(t.target)} [label={_quote(f'{t.id}: {label}')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def interface_dot(iface: StateInterface) -> str:
    lines = [f"digraph {_quote(iface.name)} {{", "  rankdir=LR;"]
    lines += [_node(s, s, s == iface.initial) for s in iface.states]
    for t in iface.transitions:
        label = t.trigger.event if isinstance(t.trigger, Command) else f"internal {t.trigger.event}"
        if t.notifies:
            label += " ^" + " ^".join(t.notifies)
        lines.append(f"  {_quote(t.source)} -> {_quote(t.target)} [label={_quote(f'{t.id}: {label}')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
