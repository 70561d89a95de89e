"""Build, validate and emit the VHDL design for a mapped CI.

The generated entity always exposes exactly eight ports: clk, clk_en, reset
and start (1 bit in), dataa and datab (32 bit in), done (1 bit out) and
result (32 bit out).  Internally the datapath holds one register per used
input operand (r_<name>) and one per op node (s_<id>); component instances
are combinational between registers.

Cycle contract, counting only clk_en-enabled cycles and starting at 0 on the
cycle start is sampled high: the ceil(k/2) loading cycles latch operand pairs
from (dataa, datab); each DFG level then takes one cycle, with every node of
that level latched together.  done is registered high exactly during cycle
ceil(k/2) + max(max_level, 1) - 1, when the root value is valid on result.
For a design with operations the root value is read combinationally from the
final component's output (its register only settles one cycle later); for the
zero-operation identity design it is the extended input register.

Emission is deterministic: equal designs yield byte-identical text (LF line
endings, two-space indents).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import vhdl_ast as ast
from .frontend import CiSpec, LeafNode, OpNode
from .lpm import (
    COMPONENT_DECLS,
    ComponentKind,
    ConcatExtendGenerics,
    DivideGenerics,
    MultGenerics,
    render_instance,
)
from .mapper import (
    AdapterPlan,
    DivOutput,
    InstancePlan,
    MappedDesign,
    Side,
    done_cycle_enabled,
    input_reg,
    load_cycle_count,
    node_reg,
)

ENTITY_PORTS: tuple[ast.Port, ...] = (
    ast.Port("clk", "in", 1),
    ast.Port("clk_en", "in", 1),
    ast.Port("reset", "in", 1),
    ast.Port("start", "in", 1),
    ast.Port("dataa", "in", 32),
    ast.Port("datab", "in", 32),
    ast.Port("done", "out", 1),
    ast.Port("result", "out", 32),
)


@dataclass(frozen=True)
class Violation:
    """One structural rule broken by a design, naming the offender."""
    rule: str
    name: str
    detail: str = ""


def adapter_wire(index: int) -> str:
    return f"w_x_{index}"


def instance_label(op_index: int, kind_name: str) -> str:
    return f"u_{kind_name.lower()}_{op_index}"


def _vec_type(width: int) -> str:
    return f"std_logic_vector({width - 1} downto 0)"


def _wire_names(inst: InstancePlan) -> tuple[tuple[str, int], ...]:
    """Combinational output wires an instance drives, with widths."""
    if inst.kind is ComponentKind.ADD_SUB:
        return ((f"w_{inst.node}", inst.generics.width),)
    if inst.kind is ComponentKind.MULT:
        assert isinstance(inst.generics, MultGenerics)
        return ((f"w_{inst.node}_p", inst.generics.width_p),)
    assert isinstance(inst.generics, DivideGenerics)
    wires = [(f"w_{inst.node}_q", inst.generics.width_n),
             (f"w_{inst.node}_r", inst.generics.width_d)]
    if inst.mod_correct:
        wires.append((f"w_{inst.node}_m", inst.generics.width_d))
    return tuple(wires)


def _node_take(inst: InstancePlan) -> tuple[str, int]:
    """The wire carrying the node's value and that wire's width.  The node
    value is the low node-width bits of this wire."""
    if inst.kind is ComponentKind.ADD_SUB:
        return f"w_{inst.node}", inst.generics.width
    if inst.kind is ComponentKind.MULT:
        assert isinstance(inst.generics, MultGenerics)
        return f"w_{inst.node}_p", inst.generics.width_p
    assert isinstance(inst.generics, DivideGenerics)
    if inst.div_output is DivOutput.QUOTIENT:
        return f"w_{inst.node}_q", inst.generics.width_n
    if inst.mod_correct:
        return f"w_{inst.node}_m", inst.generics.width_d
    return f"w_{inst.node}_r", inst.generics.width_d


def _take_expr(signal: str, signal_width: int, take: int) -> str:
    if take == signal_width:
        return signal
    return f"{signal}({take - 1} downto 0)"


def _node_value_expr(inst: InstancePlan, node_width: int) -> str:
    signal, width = _node_take(inst)
    return _take_expr(signal, width, node_width)


def _result_expr(base_signal: str, base_width: int, root_width: int,
                 root_signed: bool, out_width: int, out_signed: bool) -> str:
    """Adapt the root value to the output width, then to the 32-bit result
    port.  Truncation keeps low bits; widening extends by the signedness of
    the value being widened."""
    if out_width <= root_width:
        expr = _take_expr(base_signal, base_width, out_width)
        width = out_width
    elif root_signed == out_signed:
        # one extension covers output width and port width
        inner = _take_expr(base_signal, base_width, root_width)
        cast = "signed" if root_signed else "unsigned"
        return f"std_logic_vector(resize({cast}({inner}), 32))"
    else:
        inner = _take_expr(base_signal, base_width, root_width)
        cast = "signed" if root_signed else "unsigned"
        expr = f"std_logic_vector(resize({cast}({inner}), {out_width}))"
        width = out_width
    if width < 32:
        cast = "signed" if out_signed else "unsigned"
        expr = f"std_logic_vector(resize({cast}({expr}), 32))"
    return expr


def build_design(spec: CiSpec, mapped: MappedDesign) -> ast.HdlDesign:
    """Assemble the complete VHDL AST for a mapped design."""
    dfg = mapped.dfg
    analysis = mapped.analysis
    loads = load_cycle_count(mapped)
    max_level = analysis.max_level
    done_cycle = done_cycle_enabled(mapped)

    def child_signal(node_id: int) -> str:
        node = dfg.node(node_id)
        if isinstance(node, LeafNode):
            return input_reg(node.decl.name)
        return node_reg(node_id)

    adapter_index = {id(a): i for i, a in enumerate(mapped.adapters)}

    def bound_input(inst_node: int, side: Side, child: int) -> str:
        adapter = mapped.adapter_for(inst_node, side)
        if adapter is not None:
            return adapter_wire(adapter_index[id(adapter)])
        return child_signal(child)

    signals: list[ast.SignalDecl] = [
        ast.SignalDecl("cnt", f"integer range 0 to {done_cycle}")]
    for name in analysis.operand_sequence:
        width = spec.input_by_name(name).width
        signals.append(ast.SignalDecl(input_reg(name), _vec_type(width)))

    instances: list[ast.Instance] = []
    assigns: list[ast.ConcurrentAssign] = []
    decls_by_kind: dict[ComponentKind, ast.ComponentDecl] = {}

    for op_index, node_id in enumerate(analysis.operation_sequence):
        node = dfg.node(node_id)
        assert isinstance(node, OpNode)
        inst = mapped.instance_for(node_id)

        for side, child in ((Side.LEFT, node.left), (Side.RIGHT, node.right)):
            adapter = mapped.adapter_for(node_id, side)
            if adapter is None:
                continue
            idx = adapter_index[id(adapter)]
            wire = adapter_wire(idx)
            signals.append(ast.SignalDecl(wire, _vec_type(adapter.to_width)))
            decl, a_inst = render_instance(
                ComponentKind.CONCAT_EXTEND,
                ConcatExtendGenerics(adapter.from_width, adapter.to_width,
                                     adapter.extension),
                f"x_{idx}",
                {"a": child_signal(child), "result": wire})
            decls_by_kind[ComponentKind.CONCAT_EXTEND] = decl
            instances.append(a_inst)

        for wire, width in _wire_names(inst):
            signals.append(ast.SignalDecl(wire, _vec_type(width)))
        signals.append(ast.SignalDecl(node_reg(node_id), _vec_type(dfg.width[node_id])))

        left_sig = bound_input(node_id, Side.LEFT, node.left)
        right_sig = bound_input(node_id, Side.RIGHT, node.right)
        if inst.kind is ComponentKind.ADD_SUB:
            bindings = {"dataa": left_sig, "datab": right_sig,
                        "result": f"w_{node_id}"}
        elif inst.kind is ComponentKind.MULT:
            bindings = {"dataa": left_sig, "datab": right_sig,
                        "result": f"w_{node_id}_p"}
        else:
            bindings = {"numer": left_sig, "denom": right_sig,
                        "quotient": f"w_{node_id}_q", "remain": f"w_{node_id}_r"}
        decl, u_inst = render_instance(
            inst.kind, inst.generics, instance_label(op_index, node.kind.name),
            bindings)
        decls_by_kind[inst.kind] = decl
        instances.append(u_inst)

        if inst.mod_correct:
            assert isinstance(inst.generics, DivideGenerics)
            r_wire = f"w_{node_id}_r"
            msb = inst.generics.width_d - 1
            assigns.append(ast.ConcurrentAssign(
                f"w_{node_id}_m",
                f"std_logic_vector(unsigned({r_wire}) + unsigned({right_sig})) "
                f"when unsigned({r_wire}) /= 0 and {r_wire}({msb}) /= {right_sig}({msb}) "
                f"else {r_wire}"))

    root = dfg.root
    root_node = dfg.node(root)
    if isinstance(root_node, LeafNode):
        base, base_width = input_reg(root_node.decl.name), root_node.decl.width
    else:
        base, base_width = _node_take(mapped.instance_for(root))
    assigns.append(ast.ConcurrentAssign(
        "result",
        _result_expr(base, base_width, dfg.width[root], dfg.signed[root],
                     spec.output.width, spec.output.signed)))

    # control steps: cycles 1..done_cycle+? -> the counter runs 0..done_cycle,
    # wrapping to idle on the edge that ends the done cycle
    level_nodes: dict[int, list[int]] = {}
    for node_id in analysis.operation_sequence:
        level_nodes.setdefault(dfg.level[node_id], []).append(node_id)

    def pair_loads(pair_index: int) -> tuple[ast.RegisterLoad, ...]:
        first, second = mapped.loading.cycles[pair_index]
        out = []
        for name, port in ((first, "dataa"), (second, "datab")):
            if name is None:
                continue
            width = spec.input_by_name(name).width
            expr = port if width == 32 else f"{port}({width - 1} downto 0)"
            out.append(ast.RegisterLoad(input_reg(name), expr))
        return tuple(out)

    def stage_loads(level: int) -> tuple[ast.RegisterLoad, ...]:
        out = []
        for node_id in level_nodes.get(level, ()):  # operation order within level
            inst = mapped.instance_for(node_id)
            out.append(ast.RegisterLoad(node_reg(node_id),
                                        _node_value_expr(inst, dfg.width[node_id])))
        return tuple(out)

    steps = [ast.ControlStep(0, pair_loads(0), done_cycle == 1, 1)]
    for c in range(1, done_cycle + 1):
        if c < loads:
            step_loads = pair_loads(c)
        elif max_level >= 1 and c >= loads:
            step_loads = stage_loads(c - loads + 1)
        else:
            step_loads = ()
        steps.append(ast.ControlStep(c, step_loads, c == done_cycle - 1,
                                     c + 1 if c < done_cycle else 0))

    reset_loads = [("cnt", "0"), ("done", "'0'")]
    reset_loads += [(s.name, "(others => '0')") for s in signals
                    if s.name.startswith(("r_", "s_"))]
    process = ast.ControlProcess("control", "cnt", done_cycle, tuple(steps),
                                 tuple(reset_loads))

    components = tuple(decl for _, decl in
                       sorted(decls_by_kind.items(), key=lambda kv: kv[0].name))
    libraries = ["library ieee;", "use ieee.std_logic_1164.all;",
                 "use ieee.numeric_std.all;"]
    if any(k is not ComponentKind.CONCAT_EXTEND for k in decls_by_kind):
        libraries += ["library lpm;", "use lpm.lpm_components.all;"]

    header = (
        f"-- {spec.name}: multicycle custom-instruction datapath (opcode {spec.opcode}).",
        "-- Interface: start latches the first operand pair; further pairs stream",
        "-- on consecutive enabled cycles; done pulses for one enabled cycle when",
        "-- the result is valid.",
    )
    architecture = ast.Architecture("rtl", spec.name, components, tuple(signals),
                                    tuple(instances), tuple(assigns), process)
    return ast.HdlDesign(header, tuple(libraries),
                         ast.Entity(spec.name, ENTITY_PORTS), architecture,
                         support_concat=ComponentKind.CONCAT_EXTEND in decls_by_kind)


# --- emission -------------------------------------------------------------

SUPPORT_ENTITY_TEXT = """\
-- Support unit: widens a vector by replicating its top bit (sign extension)
-- or by padding with zeros, using the concatenation operator.

library ieee;
use ieee.std_logic_1164.all;

entity ci_concat_extend is
  generic (
    FROM_WIDTH : natural;
    TO_WIDTH : natural;
    EXTEND_MODE : string
  );
  port (
    a : in std_logic_vector(FROM_WIDTH - 1 downto 0);
    result : out std_logic_vector(TO_WIDTH - 1 downto 0)
  );
end entity ci_concat_extend;

architecture rtl of ci_concat_extend is
  signal pad : std_logic_vector(TO_WIDTH - FROM_WIDTH - 1 downto 0);
begin
  pad <= (others => a(FROM_WIDTH - 1)) when EXTEND_MODE = "SIGN" else (others => '0');
  result <= pad & a;
end architecture rtl;
"""


def _port_type(port: ast.Port) -> str:
    return "std_logic" if port.width == 1 else _vec_type(port.width)


def emit_component_decl(decl: ast.ComponentDecl, indent: str = "  ") -> str:
    lines = [f"{indent}component {decl.name}"]
    lines.append(f"{indent}  generic (")
    for i, g in enumerate(decl.generics):
        sep = ";" if i < len(decl.generics) - 1 else ""
        lines.append(f"{indent}    {g.name} : {g.vhdl_type}{sep}")
    lines.append(f"{indent}  );")
    lines.append(f"{indent}  port (")
    for i, p in enumerate(decl.ports):
        sep = ";" if i < len(decl.ports) - 1 else ""
        lines.append(f"{indent}    {p.name} : {p.direction} {p.type_text}{sep}")
    lines.append(f"{indent}  );")
    lines.append(f"{indent}end component;")
    return "\n".join(lines)


def emit_instance(inst: ast.Instance, indent: str = "  ") -> str:
    lines = [f"{indent}{inst.label} : {inst.component}"]
    lines.append(f"{indent}  generic map (")
    for i, (name, value) in enumerate(inst.generic_map):
        sep = "," if i < len(inst.generic_map) - 1 else ""
        lines.append(f"{indent}    {name} => {value}{sep}")
    lines.append(f"{indent}  )")
    lines.append(f"{indent}  port map (")
    for i, (name, value) in enumerate(inst.port_map):
        sep = "," if i < len(inst.port_map) - 1 else ""
        lines.append(f"{indent}    {name} => {value}{sep}")
    lines.append(f"{indent}  );")
    return "\n".join(lines)


def _emit_step_loads(lines: list[str], loads: tuple[ast.RegisterLoad, ...],
                     indent: str) -> None:
    for load in loads:
        lines.append(f"{indent}{load.target} <= {load.expr};")


def _emit_process(proc: ast.ControlProcess) -> str:
    lines = [f"  {proc.label} : process (clk)", "  begin",
             "    if rising_edge(clk) then", "      if reset = '1' then"]
    for target, value in proc.reset_loads:
        lines.append(f"        {target} <= {value};")
    lines.append("      elsif clk_en = '1' then")
    lines.append("        done <= '0';")
    first = proc.steps[0]
    lines.append(f"        if {proc.counter} = 0 then")
    lines.append("          if start = '1' then")
    _emit_step_loads(lines, first.loads, "            ")
    if first.set_done:
        lines.append("            done <= '1';")
    lines.append(f"            {proc.counter} <= {first.next_index};")
    lines.append("          end if;")
    for step in proc.steps[1:]:
        lines.append(f"        elsif {proc.counter} = {step.index} then")
        _emit_step_loads(lines, step.loads, "          ")
        if step.set_done:
            lines.append("          done <= '1';")
        lines.append(f"          {proc.counter} <= {step.next_index};")
    lines.append("        end if;")
    lines.append("      end if;")
    lines.append("    end if;")
    lines.append(f"  end process {proc.label};")
    return "\n".join(lines)


def emit_vhdl(design: ast.HdlDesign) -> str:
    """Render a design to deterministic VHDL text."""
    parts: list[str] = []
    parts.append("\n".join(design.header_comment))
    parts.append("\n".join(design.libraries))

    entity = design.entity
    lines = [f"entity {entity.name} is", "  port ("]
    for i, port in enumerate(entity.ports):
        sep = ";" if i < len(entity.ports) - 1 else ""
        lines.append(f"    {port.name} : {port.direction} {_port_type(port)}{sep}")
    lines.append("  );")
    lines.append(f"end entity {entity.name};")
    parts.append("\n".join(lines))

    arch = design.architecture
    body: list[str] = [f"architecture {arch.name} of {arch.of_entity} is"]
    for decl in arch.components:
        body.append("")
        body.append(emit_component_decl(decl))
    body.append("")
    for sig in arch.signals:
        body.append(f"  signal {sig.name} : {sig.type_text};")
    body.append("")
    body.append("begin")
    for inst in arch.instances:
        body.append("")
        body.append(emit_instance(inst))
    for assign in arch.assigns:
        body.append("")
        body.append(f"  {assign.target} <= {assign.expr};")
    body.append("")
    body.append(_emit_process(arch.process))
    body.append("")
    body.append(f"end architecture {arch.name};")
    parts.append("\n".join(body))

    text = "\n\n".join(parts) + "\n"
    if design.support_concat:
        text += "\n" + SUPPORT_ENTITY_TEXT
    return text


# --- structural validation -------------------------------------------------

_ID_OK = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


def _legal_identifier(name: str) -> bool:
    return bool(_ID_OK.match(name)) and "__" not in name and not name.endswith("_")


def validate_structure(design: ast.HdlDesign) -> list[Violation]:
    """Check design invariants; an empty list means the design is sound.

    Rules: the entity port set is exactly the eight-port CI interface; every
    identifier is VHDL-legal and case-insensitively unique; signals are
    declared once; each component is declared once and every instance binds
    every declared port of a declared component to a declared signal or port;
    assignment and load targets are declared; nothing has two drivers.
    """
    violations: list[Violation] = []
    arch = design.architecture

    expected = {(p.name, p.direction, p.width) for p in ENTITY_PORTS}
    actual = {(p.name, p.direction, p.width) for p in design.entity.ports}
    if actual != expected:
        missing = expected - actual
        extra = actual - expected
        violations.append(Violation("entity-ports", design.entity.name,
                                    f"missing {sorted(missing)}, extra {sorted(extra)}"))

    names: dict[str, str] = {}

    def claim(name: str, role: str) -> None:
        if not _legal_identifier(name):
            violations.append(Violation("illegal-identifier", name, role))
        key = name.lower()
        if key in names:
            rule = "duplicate-signal" if role == "signal" and names[key] == "signal" \
                else "name-collision"
            violations.append(Violation(rule, name, f"{role} vs {names[key]}"))
        else:
            names[key] = role

    claim(design.entity.name, "entity")
    for port in design.entity.ports:
        claim(port.name, "port")
    for sig in arch.signals:
        claim(sig.name, "signal")
    for decl in arch.components:
        claim(decl.name, "component")
    for inst in arch.instances:
        claim(inst.label, "instance")
    claim(arch.process.label, "process")

    declared_values = {s.name for s in arch.signals} | \
                      {p.name for p in design.entity.ports}
    out_ports = {p.name for p in design.entity.ports if p.direction == "out"}
    signal_names = {s.name for s in arch.signals}

    components = {}
    for decl in arch.components:
        if decl.name in components:
            violations.append(Violation("duplicate-component", decl.name))
        components[decl.name] = decl

    drivers: dict[str, str] = {}

    def drive(name: str, who: str) -> None:
        if name in drivers:
            violations.append(Violation("multiple-drivers", name,
                                        f"{who} vs {drivers[name]}"))
        else:
            drivers[name] = who

    for inst in arch.instances:
        decl = components.get(inst.component)
        if decl is None:
            violations.append(Violation("undeclared-component", inst.component,
                                        f"instance {inst.label}"))
            continue
        decl_ports = {p.name: p for p in decl.ports}
        bound = {name for name, _ in inst.port_map}
        for missing in sorted(set(decl_ports) - bound):
            violations.append(Violation("dangling-port", missing,
                                        f"instance {inst.label}"))
        for unknown in sorted(bound - set(decl_ports)):
            violations.append(Violation("unknown-port", unknown,
                                        f"instance {inst.label}"))
        for name, value in inst.port_map:
            if value not in declared_values:
                violations.append(Violation("undeclared-signal", value,
                                            f"{inst.label}.{name}"))
            elif decl_ports.get(name) is not None and decl_ports[name].direction == "out":
                drive(value, f"instance {inst.label}")

    for assign in arch.assigns:
        if assign.target not in signal_names | out_ports:
            violations.append(Violation("assign-target", assign.target))
        else:
            drive(assign.target, "concurrent assignment")

    process_targets = set()
    for step in arch.process.steps:
        for load in step.loads:
            process_targets.add(load.target)
            if load.target not in signal_names:
                violations.append(Violation("load-target", load.target,
                                            f"step {step.index}"))
    for target in sorted(process_targets):
        if target in signal_names:
            drive(target, "control process")

    return violations
