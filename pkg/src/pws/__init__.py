"""Part-Whole Statecharts: state semantics, verification, holarchy
composition and simulation for systems of systems."""

from .compose import Holarchy, bind, build_holarchy, extract_interface, flatten
from .dsl import load_model, parse_model, parse_properties, serialize_model
from .model import (
    Command,
    CommandAction,
    ExternalCommand,
    Internal,
    InterfaceTransition,
    Model,
    PartNotification,
    Pattern,
    PwsSystem,
    Slot,
    StateInterface,
    WholeTransition,
    validate_model,
)
from .semantics import compute_semantics, initial_configuration, post, transf, trigger_feasible
from .sim import Runtime, init_runtime
from .verify import verify, verify_holarchy

__version__ = "0.1.0"

__all__ = [
    "Command", "CommandAction", "ExternalCommand", "Holarchy", "Internal", "InterfaceTransition",
    "Model", "PartNotification", "Pattern", "PwsSystem", "Runtime", "Slot", "StateInterface",
    "WholeTransition", "bind", "build_holarchy", "compute_semantics", "extract_interface", "flatten",
    "init_runtime", "initial_configuration", "load_model", "parse_model", "parse_properties", "post",
    "serialize_model", "transf", "trigger_feasible", "validate_model", "verify", "verify_holarchy",
]
