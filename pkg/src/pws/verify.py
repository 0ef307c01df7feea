"""Property checking over computed state semantics.

INIT and NEVER are set predicates on the semantics map. LEAVES is decided
on the whole graph: the states whose semantics allows ``slot=state`` must
form an acyclic region without dead ends, so every path through it exits.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from .compose import Holarchy, format_path, node_interface, shape_hash
from .dsl import Property, check_properties, format_system, serialize_properties
from .model import Pattern, PwsSystem
from .semantics import SemanticsMap, compute_semantics, format_configuration


@dataclass
class Verdict:
    name: str
    kind: str
    holds: bool
    witness: Optional[dict] = None
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "verdict": "holds" if self.holds else "fails", "witness": self.witness}

    def __str__(self):
        if self.holds:
            return f"{self.name}: holds"
        return f"{self.name}: FAILS ({self.detail})"


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    kind: str
    message: str

    def __str__(self):
        return f"{self.severity}: {self.kind}: {self.message}"


def _matcher(pattern, slots):
    if isinstance(pattern, Pattern):
        return pattern.compile(slots)
    allowed = frozenset(pattern)
    return allowed.__contains__


def check_init(sem: SemanticsMap, initial: str, pattern, name="INIT") -> Verdict:
    configs = sem[initial]
    if not configs:
        return Verdict(name, "INIT", False, {"state": initial, "configuration": None},
                       f"initial whole state {initial} has empty semantics")
    matches = _matcher(pattern, sem.slots)
    for config in sorted(configs):
        if not matches(config):
            return Verdict(name, "INIT", False, {"state": initial, "configuration": list(config)},
                           f"{initial} admits {format_configuration(config)}")
    return Verdict(name, "INIT", True)


def check_never(sem: SemanticsMap, pattern, name="NEVER") -> Verdict:
    matches = _matcher(pattern, sem.slots)
    for state, configs in sem.items():
        for config in sorted(configs):
            if matches(config):
                return Verdict(name, "NEVER", False, {"state": state, "configuration": list(config)},
                               f"reachable in {state} as {format_configuration(config)}")
    return Verdict(name, "NEVER", True)


def feasible_edges(system: PwsSystem, sem: SemanticsMap) -> Dict[str, List[str]]:
    """Successor whole states through transitions that can actually fire."""
    succ: Dict[str, List[str]] = {s: [] for s in system.states}
    for t in system.transitions:
        if sem.preimages.get(t.id) and t.target not in succ[t.source]:
            succ[t.source].append(t.target)
    return succ


def check_leaves(system: PwsSystem, sem: SemanticsMap, slot: str, state: str, name=None) -> Verdict:
    name = name or f"LEAVES {slot}.{state}"
    if slot not in sem.slots:
        raise KeyError(f"unknown slot {slot}")
    i = sem.slots.index(slot)
    region = [s for s in system.states if any(c[i] == state for c in sem[s])]
    inside = set(region)
    succ = feasible_edges(system, sem)

    for s in region:
        if not succ[s]:
            return Verdict(name, "LEAVES", False, {"trapped": s},
                           f"{s} has no feasible outgoing transition while {slot}={state}")

    # iterative DFS for a cycle inside the region
    color = {s: 0 for s in region}
    for root in region:
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        trail = [root]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in inside:
                    continue
                if color[nxt] == 1:
                    cycle = trail[trail.index(nxt):]
                    return Verdict(name, "LEAVES", False, {"cycle": cycle},
                                   "cycle " + " -> ".join(cycle + [nxt]) + f" keeps {slot}={state}")
                if color[nxt] == 0:
                    color[nxt] = 1
                    stack.append((nxt, iter(succ[nxt])))
                    trail.append(nxt)
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack.pop()
                trail.pop()
    return Verdict(name, "LEAVES", True)


def check_wellformed(system: PwsSystem, sem: SemanticsMap, diagnostics=None) -> List[Finding]:
    diagnostics = sem.diagnostics if diagnostics is None else diagnostics
    out = [Finding("error", d.kind, d.message) for d in diagnostics]
    for s in sem.unreachable():
        out.append(Finding("warning", "unreachable-whole-state", f"unreachable whole state {s}"))
    for s in system.states:
        ts = system.outgoing(s)
        if sem[s] and ts and not any(sem.preimages.get(t.id) for t in ts):
            out.append(Finding("warning", "dead-whole-state",
                               f"no transition out of {s} can fire from its semantics"))
    return out


def check_property(system: PwsSystem, sem: SemanticsMap, prop: Property) -> Verdict:
    if prop.kind == "INIT":
        return check_init(sem, system.initial, prop.pattern, prop.name)
    if prop.kind == "NEVER":
        return check_never(sem, prop.pattern, prop.name)
    if prop.kind == "LEAVES":
        return check_leaves(system, sem, prop.slot, prop.state, prop.name)
    raise ValueError(f"unknown property kind {prop.kind}")


@dataclass
class VerificationReport:
    system: str
    verdicts: List[Verdict] = field(default_factory=list)
    findings: List[Finding] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    semantics: Optional[SemanticsMap] = field(default=None, repr=False)

    @property
    def properties_hold(self) -> bool:
        return all(v.holds for v in self.verdicts)

    @property
    def clean(self) -> bool:
        return not self.findings

    @property
    def ok(self) -> bool:
        return self.properties_hold and self.clean

    def failures(self) -> List[Verdict]:
        return [v for v in self.verdicts if not v.holds]

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "properties": [v.to_json() for v in self.verdicts],
            "wellformed": [{"severity": f.severity, "kind": f.kind, "message": f.message} for f in self.findings],
            "stats": dict(self.stats),
        }

    def render(self) -> str:
        st = self.stats
        lines = [f"system {self.system}: {st.get('whole_states', 0)} whole states, "
                 f"{st.get('configurations', 0)} configurations, {st.get('iterations', 0)} iterations"]
        lines += [f"  {v}" for v in self.verdicts]
        if self.findings:
            lines += [f"  {f}" for f in self.findings]
        else:
            lines.append("  well-formedness: clean")
        return "\n".join(lines) + "\n"


def verify(system: PwsSystem, bindings, properties: Sequence[Property] = ()) -> VerificationReport:
    check_properties(properties, system, bindings)
    sem = compute_semantics(system, bindings)
    report = VerificationReport(system.name, semantics=sem)
    report.stats = {
        "whole_states": len(system.states),
        "reachable_whole_states": len(system.states) - len(sem.unreachable()),
        "configurations": sem.configuration_count(),
        "arity": sem.arity,
        "iterations": sem.iterations,
        "iteration_bound": sem.bound,
    }
    report.findings = check_wellformed(system, sem)
    report.verdicts = [check_property(system, sem, p) for p in properties]
    return report


# -- holarchies ---------------------------------------------------------------


class VerificationCache:
    """Reports keyed by holon content and the shapes of its bound parts."""

    def __init__(self):
        self.reports: Dict[str, VerificationReport] = {}
        self.hits = 0
        self.misses = 0

    def get(self, key):
        report = self.reports.get(key)
        if report is None:
            self.misses += 1
        else:
            self.hits += 1
        return report

    def put(self, key, report):
        self.reports[key] = report


def holon_key(system: PwsSystem, bindings, child_interfaces, properties) -> str:
    h = hashlib.sha256()
    h.update(format_system(system).encode())
    for slot in system.slots:
        h.update(shape_hash(bindings[slot.name]).encode())
    for iface in child_interfaces:
        h.update(shape_hash(iface).encode())
    h.update(serialize_properties(properties).encode())
    return h.hexdigest()


def verify_holarchy(holarchy: Holarchy, properties: Optional[Mapping] = None,
                    cache: Optional[VerificationCache] = None) -> Dict[str, VerificationReport]:
    """Verify every holon bottom-up against its own slots' interfaces.

    ``properties`` maps holon paths (``"."`` for the root, ``"a/b"``
    below) to property lists. A holon's analysis only sees its direct
    parts through their declared interfaces; bound children need only
    match those interfaces, so their internals never enter the parent's
    configuration space.
    """
    properties = properties or {}
    reports: Dict[str, VerificationReport] = {}
    for path, system in reversed(holarchy.holons()):
        key_path = format_path(path)
        props = list(properties.get(key_path, properties.get(path, ())))
        bindings = holarchy.bindings_for(system)
        children = [node_interface(node) for _, node in holarchy.children(path)]
        report = None
        key = None
        if cache is not None:
            key = holon_key(system, bindings, children, props)
            report = cache.get(key)
        if report is None:
            report = verify(system, bindings, props)
            if cache is not None:
                cache.put(key, report)
        reports[key_path] = report
    return reports
