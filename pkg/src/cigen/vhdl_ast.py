"""Plain dataclasses describing the structure of a generated VHDL design.

The emitter renders these to text; the structural validator walks them
directly, so checks never depend on parsing emitted VHDL back in.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Port:
    """Entity port.  width == 1 renders as std_logic, wider as a vector."""
    name: str
    direction: str  # 'in' or 'out'
    width: int


@dataclass(frozen=True)
class Entity:
    name: str
    ports: tuple[Port, ...]


@dataclass(frozen=True)
class GenericDecl:
    name: str
    vhdl_type: str  # 'natural' or 'string'


@dataclass(frozen=True)
class PortDecl:
    """Component port with its type spelled out (ranges may use generics)."""
    name: str
    direction: str
    type_text: str


@dataclass(frozen=True)
class ComponentDecl:
    name: str
    generics: tuple[GenericDecl, ...]
    ports: tuple[PortDecl, ...]


@dataclass(frozen=True)
class SignalDecl:
    name: str
    type_text: str


@dataclass(frozen=True)
class Instance:
    """Component instantiation.  Port map values must be signal or port names."""
    label: str
    component: str
    generic_map: tuple[tuple[str, str], ...]
    port_map: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class ConcurrentAssign:
    target: str
    expr: str


@dataclass(frozen=True)
class RegisterLoad:
    target: str
    expr: str


@dataclass(frozen=True)
class ControlStep:
    """One branch of the clocked control chain, guarded by a counter value.

    index 0 is additionally guarded by start.  set_done drives the done
    register high for the following enabled cycle.
    """
    index: int
    loads: tuple[RegisterLoad, ...]
    set_done: bool
    next_index: int


@dataclass(frozen=True)
class ControlProcess:
    label: str
    counter: str
    counter_max: int
    steps: tuple[ControlStep, ...]
    reset_loads: tuple[tuple[str, str], ...]  # (target, reset value expression)


@dataclass(frozen=True)
class Architecture:
    name: str
    of_entity: str
    components: tuple[ComponentDecl, ...]
    signals: tuple[SignalDecl, ...]
    instances: tuple[Instance, ...]
    assigns: tuple[ConcurrentAssign, ...]
    process: ControlProcess


@dataclass(frozen=True)
class HdlDesign:
    """A complete design: one entity plus, when extension adapters exist,
    a trailing support entity providing the concat/extend component."""
    header_comment: tuple[str, ...]
    libraries: tuple[str, ...]
    entity: Entity
    architecture: Architecture
    support_concat: bool = False
