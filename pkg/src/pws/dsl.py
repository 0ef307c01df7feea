"""Text format for interfaces, systems, holarchies and property files.

Statements end at a newline or ``;`` and ``#`` starts a comment, e.g.::

    interface TrafficLight {
      initial R
      states R G Y
      t_go: R -> G on go
      t_red: Y -> R internal tout notify stopped
    }

    system Crossroad {
      parts { main: TrafficLight initial G; farm: TrafficLight }
      whole {
        initial Main
        states Main W1
        t1: Main -> W1 on farm.car [main=G] do main.stop
      }
    }

    holarchy Airport { root ATC; bind plane1 system Plane }

Property files hold one ``INIT``, ``NEVER`` or ``LEAVES`` line each.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from .errors import DslError
from .model import (
    Binding,
    Command,
    CommandAction,
    ExternalCommand,
    HolarchyDecl,
    Internal,
    InterfaceTransition,
    Model,
    PartNotification,
    Pattern,
    PwsSystem,
    Slot,
    Span,
    StateInterface,
    WholeTransition,
    validate_model,
)

SourceModel = Model


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # "lexical" | "syntax" | "reference"
    message: str
    span: Span

    def __str__(self):
        return f"{self.span}: {self.kind} error: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, PUNCT, NL, EOF
    text: str
    span: Span


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)|(?P<comment>#[^\n]*)|(?P<nl>\n)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<arrow>->)|(?P<punct>[{}:;,.=*|\[\]()/])"
)


def tokenize(text: str, filename: str = "<string>") -> List[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = Span(filename, line, pos - line_start + 1)
        if m is None:
            raise DslError([Diagnostic("lexical", f"unexpected character {text[pos]!r}", span)])
        kind = m.lastgroup
        if kind == "nl":
            tokens.append(Token("NL", "\n", span))
            line, line_start = line + 1, m.end()
        elif kind == "ident":
            tokens.append(Token("IDENT", m.group(), span))
        elif kind in ("arrow", "punct"):
            tok = m.group()
            tokens.append(Token("NL" if tok == ";" else "PUNCT", tok, span))
        pos = m.end()
    tokens.append(Token("EOF", "", Span(filename, line, pos - line_start + 1)))
    return tokens


class _Parser:
    def __init__(self, text, filename):
        self.tokens = tokenize(text, filename)
        self.pos = 0

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.tok
        found = "end of file" if tok.kind == "EOF" else ("newline" if tok.kind == "NL" else repr(tok.text))
        raise DslError([Diagnostic("syntax", f"{message}, found {found}", tok.span)])

    def at(self, text) -> bool:
        return self.tok.kind in ("PUNCT", "IDENT") and self.tok.text == text

    def at_end_of_statement(self) -> bool:
        return self.tok.kind in ("NL", "EOF") or self.at("}")

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def ident(self, what="identifier") -> Token:
        if self.tok.kind != "IDENT":
            self.error(f"expected {what}")
        return self.advance()

    def skip_newlines(self):
        while self.tok.kind == "NL":
            self.advance()

    def end_statement(self):
        if self.tok.kind == "NL":
            self.skip_newlines()
        elif not (self.at("}") or self.tok.kind == "EOF"):
            self.error("expected end of statement")

    def block(self, statement):
        """Parse ``{ statement* }`` calling ``statement`` at each one."""
        self.expect("{")
        self.skip_newlines()
        while not self.at("}"):
            if self.tok.kind == "EOF":
                self.error("expected '}'")
            statement()
            self.end_statement()
        self.advance()

    # -- top level

    def model(self) -> Model:
        interfaces, systems, holarchies = [], [], []
        self.skip_newlines()
        while self.tok.kind != "EOF":
            kw = self.tok
            if self.at("interface"):
                interfaces.append(self.interface())
            elif self.at("system"):
                systems.append(self.system())
            elif self.at("holarchy"):
                holarchies.append(self.holarchy())
            else:
                self.error("expected 'interface', 'system' or 'holarchy'", kw)
            self.end_statement()
        return Model(tuple(interfaces), tuple(systems), tuple(holarchies))

    def _states_and_initial(self, body):
        states, initial = [], []

        def statement():
            if self.at("initial") and self.tokens[self.pos + 1].text != ":":
                kw = self.advance()
                if initial:
                    self.error("initial state declared twice", kw)
                initial.append(self.ident("initial state name").text)
            elif self.at("states") and self.tokens[self.pos + 1].text != ":":
                self.advance()
                if self.at_end_of_statement():
                    self.error("expected state name")
                while not self.at_end_of_statement():
                    states.append(self.ident("state name").text)
            else:
                body()

        return states, initial, statement

    def interface(self) -> StateInterface:
        start = self.advance()
        name = self.ident("interface name").text
        transitions = []
        states, initial, statement = self._states_and_initial(lambda: transitions.append(self.interface_transition()))
        self.block(statement)
        if not initial:
            raise DslError([Diagnostic("syntax", f"interface {name} has no initial state", start.span)])
        return StateInterface(name, tuple(states), initial[0], tuple(transitions), span=start.span)

    def _transition_head(self):
        tid = self.ident("transition id")
        self.expect(":")
        source = self.ident("source state").text
        self.expect("->")
        target = self.ident("target state").text
        return tid, source, target

    def _notifies(self):
        out = []
        if self.at("notify"):
            self.advance()
            out.append(self.ident("notification name").text)
            while not self.at_end_of_statement():
                if self.at(","):
                    self.advance()
                out.append(self.ident("notification name").text)
        return tuple(out)

    def interface_transition(self) -> InterfaceTransition:
        tid, source, target = self._transition_head()
        if self.at("on"):
            self.advance()
            trigger = Command(self.ident("command event").text)
        elif self.at("internal"):
            self.advance()
            trigger = Internal(self.ident("internal event").text)
        else:
            self.error("expected 'on' or 'internal'")
        notifies = self._notifies()
        if not self.at_end_of_statement():
            self.error("expected 'notify' or end of transition")
        return InterfaceTransition(tid.text, source, target, trigger, notifies, span=tid.span)

    def system(self) -> PwsSystem:
        start = self.advance()
        name = self.ident("system name").text
        slots, whole = [], []

        def statement():
            if self.at("parts"):
                self.advance()
                self.block(lambda: slots.append(self.slot()))
            elif self.at("whole"):
                kw = self.advance()
                if whole:
                    self.error("whole section declared twice", kw)
                whole.append(self.whole())
            else:
                self.error("expected 'parts' or 'whole'")

        self.block(statement)
        if not whole:
            raise DslError([Diagnostic("syntax", f"system {name} has no whole section", start.span)])
        states, initial, transitions = whole[0]
        return PwsSystem(name, states, initial, transitions, tuple(slots), span=start.span)

    def slot(self) -> Slot:
        tok = self.ident("slot name")
        self.expect(":")
        iface = self.ident("interface name").text
        start = None
        if self.at("initial"):
            self.advance()
            start = self.ident("start state").text
        return Slot(tok.text, iface, start, span=tok.span)

    def whole(self):
        kw = self.tokens[self.pos - 1]
        transitions = []
        states, initial, statement = self._states_and_initial(lambda: transitions.append(self.whole_transition()))
        self.block(statement)
        if not initial:
            raise DslError([Diagnostic("syntax", "whole section has no initial state", kw.span)])
        return tuple(states), initial[0], tuple(transitions)

    def whole_transition(self) -> WholeTransition:
        tid, source, target = self._transition_head()
        if self.at("on"):
            self.advance()
            first = self.ident("event").text
            if self.at("."):
                self.advance()
                trigger = PartNotification(first, self.ident("notification name").text)
            else:
                trigger = ExternalCommand(first)
        elif self.at("internal"):
            self.advance()
            trigger = Internal(self.ident("internal event").text)
        else:
            self.error("expected 'on' or 'internal'")
        guard = None
        if self.at("["):
            self.advance()
            guard = self.pattern_body(close="]")
        commands = []
        if self.at("do"):
            self.advance()
            while True:
                part = self.ident("slot name").text
                self.expect(".")
                commands.append(CommandAction(part, self.ident("command event").text))
                if self.at(","):
                    self.advance()
                elif self.at_end_of_statement() or self.at("notify"):
                    break
        notifies = self._notifies()
        if not self.at_end_of_statement():
            self.error("expected 'do', 'notify' or end of transition")
        return WholeTransition(tid.text, source, target, trigger, guard, tuple(commands), notifies, span=tid.span)

    def pattern_body(self, close) -> Pattern:
        """Disjunctions of conjunctions, terminated by ``close``."""
        alternatives = [self.conjunction(close)]
        while self.at("|"):
            self.advance()
            alternatives.append(self.conjunction(close))
        self.expect(close)
        return Pattern(tuple(alternatives))

    def conjunction(self, close):
        atoms = []
        while True:
            if self.at("*"):
                self.advance()
            else:
                slot = self.ident("slot name").text
                self.expect("=")
                if self.at("*"):
                    self.advance()
                else:
                    atoms.append((slot, self.ident("state name").text))
            if self.at(","):
                self.advance()
                continue
            if self.at("|") or self.at(close):
                return tuple(atoms)
            self.error(f"expected ',', '|' or {close!r}")

    def holarchy(self) -> HolarchyDecl:
        start = self.advance()
        name = self.ident("holarchy name").text
        root, bindings = [], []

        def statement():
            if self.at("root"):
                kw = self.advance()
                if root:
                    self.error("root declared twice", kw)
                root.append(self.ident("root system name").text)
            elif self.at("bind"):
                kw = self.advance()
                path = [self.ident("slot name").text]
                while self.at("/"):
                    self.advance()
                    path.append(self.ident("slot name").text)
                if not (self.at("system") or self.at("interface")):
                    self.error("expected 'system' or 'interface'")
                kind = self.advance().text
                target = self.ident(f"{kind} name").text
                bindings.append(Binding(tuple(path), kind, target, span=kw.span))
            else:
                self.error("expected 'root' or 'bind'")

        self.block(statement)
        if not root:
            raise DslError([Diagnostic("syntax", f"holarchy {name} has no root", start.span)])
        return HolarchyDecl(name, root[0], tuple(bindings), span=start.span)


def parse_model(text: str, filename: str = "<string>", validate: bool = True) -> Model:
    """Parse a model document.

    With ``validate`` the result is also checked structurally and any
    violation is raised as a located ``reference`` error. Pass
    ``validate=False`` when the document refers to declarations that live
    in another file and validate the merged model instead.
    """
    model = _Parser(text, filename).model()
    if validate:
        raise_violations(model, filename)
    return model


def raise_violations(model: Model, filename="<string>"):
    violations = validate_model(model)
    if violations:
        raise DslError(
            Diagnostic("reference", f"{v.code}: {v.message}", v.span or Span(filename, 1, 1))
            for v in violations
        )


def load_model(paths, validate=True) -> Model:
    model = Model()
    for p in paths:
        p = Path(p)
        model = model.merge(parse_model(p.read_text(encoding="utf-8"), str(p), validate=False))
    if validate:
        raise_violations(model)
    return model


# -- properties --------------------------------------------------------------


@dataclass(frozen=True)
class Property:
    kind: str  # "INIT" | "NEVER" | "LEAVES"
    pattern: Optional[Pattern] = None
    slot: Optional[str] = None
    state: Optional[str] = None
    span: Optional[Span] = None

    @property
    def name(self) -> str:
        if self.kind == "LEAVES":
            return f"LEAVES {self.slot}.{self.state}"
        return f"{self.kind} {format_property_pattern(self.pattern)}"

    def __str__(self):
        return self.name


def format_property_pattern(pattern: Pattern) -> str:
    return " | ".join("(" + (", ".join(f"{s}={q}" for s, q in alt) or "*") + ")" for alt in pattern.alternatives)


def parse_properties(text: str, filename: str = "<string>", system=None, bindings=None) -> list:
    """Parse a property file.

    When ``system`` and ``bindings`` are given, slot and state names are
    checked against them and unknown names raise ``DslError``.
    """
    p = _Parser(text, filename)
    props = []
    p.skip_newlines()
    while p.tok.kind != "EOF":
        kw = p.ident("property kind")
        if kw.text in ("INIT", "NEVER"):
            alternatives = []
            while True:
                p.expect("(")
                alternatives.append(p.conjunction(")"))
                if p.at("|"):
                    # a|b inside one parenthesis group
                    while p.at("|"):
                        p.advance()
                        alternatives.append(p.conjunction(")"))
                p.expect(")")
                if not p.at("|"):
                    break
                p.advance()
            props.append(Property(kw.text, pattern=Pattern(tuple(alternatives)), span=kw.span))
        elif kw.text == "LEAVES":
            slot = p.ident("slot name").text
            p.expect(".")
            props.append(Property("LEAVES", slot=slot, state=p.ident("state name").text, span=kw.span))
        else:
            p.error("expected INIT, NEVER or LEAVES", kw)
        if p.tok.kind not in ("NL", "EOF"):
            p.error("expected end of property")
        p.skip_newlines()
    if system is not None:
        check_properties(props, system, bindings or {})
    return props


def check_properties(props, system: PwsSystem, bindings) -> None:
    errors = []
    states = {s.name: set(bindings[s.name].states) for s in system.slots if s.name in bindings}

    def check(slot, q, span):
        if slot not in states:
            errors.append(Diagnostic("reference", f"unknown slot {slot} in {system.name}", span))
        elif q not in states[slot]:
            errors.append(Diagnostic("reference", f"{q} is not a state of slot {slot}", span))

    for prop in props:
        span = prop.span or Span("<properties>", 1, 1)
        if prop.kind == "LEAVES":
            check(prop.slot, prop.state, span)
        else:
            for slot, q in prop.pattern.atoms():
                check(slot, q, span)
    if errors:
        raise DslError(errors)


# -- serialization -----------------------------------------------------------


def _notify_suffix(notifies):
    return " notify " + " ".join(notifies) if notifies else ""


def format_interface(iface: StateInterface) -> str:
    lines = [f"interface {iface.name} {{", f"  initial {iface.initial}", "  states " + " ".join(iface.states)]
    for t in iface.transitions:
        kw = "on" if isinstance(t.trigger, Command) else "internal"
        lines.append(f"  {t.id}: {t.source} -> {t.target} {kw} {t.trigger.event}{_notify_suffix(t.notifies)}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_guard(pattern: Pattern) -> str:
    return "[" + " | ".join(", ".join(f"{s}={q}" for s, q in alt) or "*" for alt in pattern.alternatives) + "]"


def format_whole_transition(t: WholeTransition) -> str:
    trig = t.trigger
    if isinstance(trig, PartNotification):
        head = f"on {trig.part}.{trig.event}"
    elif isinstance(trig, ExternalCommand):
        head = f"on {trig.event}"
    else:
        head = f"internal {trig.event}"
    out = f"{t.id}: {t.source} -> {t.target} {head}"
    if t.guard is not None:
        out += " " + format_guard(t.guard)
    if t.commands:
        out += " do " + ", ".join(str(c) for c in t.commands)
    return out + _notify_suffix(t.notifies)


def format_system(system: PwsSystem) -> str:
    lines = [f"system {system.name} {{", "  parts {"]
    for s in system.slots:
        start = f" initial {s.start}" if s.start is not None else ""
        lines.append(f"    {s.name}: {s.interface}{start}")
    lines += ["  }", "  whole {", f"    initial {system.initial}", "    states " + " ".join(system.states)]
    lines += [f"    {format_whole_transition(t)}" for t in system.transitions]
    lines += ["  }", "}"]
    return "\n".join(lines) + "\n"


def format_holarchy(h: HolarchyDecl) -> str:
    lines = [f"holarchy {h.name} {{", f"  root {h.root}"]
    lines += [f"  bind {'/'.join(b.path)} {b.kind} {b.target}" for b in h.bindings]
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_model(model: Model) -> str:
    blocks = [format_interface(i) for i in model.interfaces]
    blocks += [format_system(s) for s in model.systems]
    blocks += [format_holarchy(h) for h in model.holarchies]
    return "\n".join(blocks)


def serialize_properties(props) -> str:
    return "".join(p.name + "\n" for p in props)
