"""Cycle-accurate simulation of a mapped design, plus its reference oracle.

Two evaluators live here on purpose.  ``eval_reference`` walks the expression
tree over exact Python integers and applies the width rules at each node; it
never looks at component instances, adapters or the control schedule.
``simulate_ci`` interprets the mapped netlist cycle by cycle: a register file,
combinational component evaluation, and the same counter-driven control flow
the emitted VHDL uses.  Agreement between the two on the 32-bit result port
is the bit-exactness check the rest of the toolchain relies on.

The clock model: every loop iteration is one rising edge.  A trace row shows
the values visible during the cycle before that edge.  Registers update on
the edge only when clk_en is high; a high reset clears them on any edge,
enabled or not.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DivideByZero, InputOutOfRange, InternalCheckError, ProtocolViolation
from .frontend import CiSpec, Dfg, LeafNode, OpKind, OpNode, build_dfg
from .lpm import (
    BitVec,
    ComponentKind,
    ConcatExtendGenerics,
    DivideGenerics,
    add_sub_eval,
    concat_extend_eval,
    divide_eval,
    mod_correct_eval,
    mult_eval,
)
from .mapper import (
    DivOutput,
    MappedDesign,
    Side,
    adapt_root,
    done_cycle_enabled,
    infer_widths,
    input_reg,
    load_cycle_count,
    map_design,
    node_reg,
)


def validate_inputs(spec: CiSpec, inputs: dict[str, int]) -> None:
    """Reject missing, unknown, or out-of-range operand values."""
    declared = {decl.name for decl in spec.inputs}
    for name in inputs:
        if name not in declared:
            raise InputOutOfRange(f"'{name}' is not an input of {spec.name}")
    for decl in spec.inputs:
        if decl.name not in inputs:
            raise InputOutOfRange(f"missing value for input '{decl.name}'")
        value = inputs[decl.name]
        if decl.signed:
            lo, hi = -(1 << (decl.width - 1)), (1 << (decl.width - 1)) - 1
        else:
            lo, hi = 0, (1 << decl.width) - 1
        if not lo <= value <= hi:
            kind = "signed" if decl.signed else "unsigned"
            raise InputOutOfRange(
                f"input '{decl.name}' = {value} does not fit {kind}<{decl.width}>")


def _trunc_div(n: int, d: int) -> int:
    q = abs(n) // abs(d)
    return -q if (n < 0) != (d < 0) else q


def eval_reference(spec: CiSpec, inputs: dict[str, int],
                   dfg: Dfg | None = None) -> BitVec:
    """Evaluate the expression over exact integers, reducing each node to its
    width, and adapt the root to the 32-bit result port.

    Division truncates toward zero; remainder takes the dividend's sign and
    modulus the divisor's sign.  A zero divisor raises DivideByZero naming
    the node.  Passing a width-inferred dfg skips rebuilding it per call.
    """
    validate_inputs(spec, inputs)
    if dfg is None:
        dfg = infer_widths(build_dfg(spec))

    def value(node_id: int) -> int:
        node = dfg.node(node_id)
        if isinstance(node, LeafNode):
            return inputs[node.decl.name]
        assert isinstance(node, OpNode)
        left, right = value(node.left), value(node.right)
        if node.kind is OpKind.ADD:
            raw = left + right
        elif node.kind is OpKind.SUB:
            raw = left - right
        elif node.kind is OpKind.MUL:
            raw = left * right
        else:
            if right == 0:
                raise DivideByZero(f"zero divisor at node {node_id}", node=node_id)
            if node.kind in (OpKind.DIVS, OpKind.DIVU):
                raw = _trunc_div(left, right)
            elif node.kind in (OpKind.REMS, OpKind.REMU):
                raw = left - _trunc_div(left, right) * right
            else:
                raw = left % right
        return BitVec.from_int(raw, dfg.width[node_id]).interpret(dfg.signed[node_id])

    root = dfg.root
    root_bits = BitVec.from_int(value(root), dfg.width[root])
    return adapt_root(root_bits, dfg.signed[root], spec.output)


@dataclass(frozen=True)
class Stimulus:
    """Clock-level disturbances applied around the normal driver sequence.

    All cycle numbers are absolute (counting every clock edge from 0, enabled
    or not).  strict makes a start pulse while the unit is busy an error
    instead of a silently ignored line.
    """
    clk_en_low: frozenset[int] = frozenset()
    reset_cycles: frozenset[int] = frozenset()
    extra_start_cycles: frozenset[int] = frozenset()
    start_cycle: int = 0
    strict: bool = True
    max_cycles: int | None = None

    def __post_init__(self):
        for name in ("clk_en_low", "reset_cycles", "extra_start_cycles"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))


@dataclass
class SimResult:
    """Outcome of one simulated invocation.

    done_cycle counts every clock edge; done_cycle_enabled counts only
    enabled cycles, with the start cycle as 0, and must always equal the
    scheduled value regardless of clk_en gaps.
    """
    result: BitVec
    done_cycle: int
    done_cycle_enabled: int
    rows: list[dict] = field(default_factory=list)


class _Netlist:
    """Combinational evaluation over the current register file."""

    def __init__(self, spec: CiSpec, mapped: MappedDesign):
        self.spec = spec
        self.mapped = mapped
        self.dfg = mapped.dfg

    def initial_regs(self) -> dict[str, BitVec]:
        regs = {}
        for name in self.mapped.analysis.operand_sequence:
            regs[input_reg(name)] = BitVec(self.spec.input_by_name(name).width, 0)
        for node_id in self.mapped.analysis.operation_sequence:
            regs[node_reg(node_id)] = BitVec(self.dfg.width[node_id], 0)
        return regs

    def _port_value(self, regs: dict[str, BitVec], node_id: int, side: Side,
                    child: int) -> BitVec:
        child_node = self.dfg.node(child)
        if isinstance(child_node, LeafNode):
            raw = regs[input_reg(child_node.decl.name)]
        else:
            raw = regs[node_reg(child)]
        adapter = self.mapped.adapter_for(node_id, side)
        if adapter is None:
            return raw
        return concat_extend_eval(
            raw, ConcatExtendGenerics(adapter.from_width, adapter.to_width,
                                      adapter.extension))

    def node_output(self, regs: dict[str, BitVec], node_id: int) -> BitVec:
        """The node's combinational value at its DFG width."""
        node = self.dfg.node(node_id)
        assert isinstance(node, OpNode)
        inst = self.mapped.instance_for(node_id)
        a = self._port_value(regs, node_id, Side.LEFT, node.left)
        b = self._port_value(regs, node_id, Side.RIGHT, node.right)
        if inst.kind is ComponentKind.ADD_SUB:
            out = add_sub_eval(a, b, inst.generics.direction)
        elif inst.kind is ComponentKind.MULT:
            out = mult_eval(a, b, inst.generics)
        else:
            assert isinstance(inst.generics, DivideGenerics)
            quotient, remainder = divide_eval(a, b, inst.generics)
            if inst.div_output is DivOutput.QUOTIENT:
                out = quotient
            elif inst.mod_correct:
                out = mod_correct_eval(remainder, b)
            else:
                out = remainder
        width = self.dfg.width[node_id]
        if out.width == width:
            return out
        return BitVec(width, out.bits & ((1 << width) - 1))

    def result_port(self, regs: dict[str, BitVec]) -> BitVec:
        root = self.dfg.root
        node = self.dfg.node(root)
        if isinstance(node, LeafNode):
            value = regs[input_reg(node.decl.name)]
        else:
            value = self.node_output(regs, root)
        return adapt_root(value, self.dfg.signed[root], self.spec.output)


def simulate_ci(spec: CiSpec, inputs: dict[str, int],
                mapped: MappedDesign | None = None,
                stimulus: Stimulus | None = None,
                record: bool = True) -> SimResult:
    """Drive one invocation through the netlist and return its result.

    The driver issues start with the first operand pair, streams the rest on
    the following enabled cycles, holds every line through clk_en-low cycles,
    and reissues from scratch after a reset pulse.  DivideByZero surfaces at
    the enabled cycle whose register latch (or done-cycle result read)
    consumes the bad output, with that cycle index attached.
    """
    if mapped is None:
        mapped = map_design(spec)
    validate_inputs(spec, inputs)
    stim = stimulus or Stimulus()

    net = _Netlist(spec, mapped)
    dfg = mapped.dfg
    loads = load_cycle_count(mapped)
    done_target = done_cycle_enabled(mapped)
    max_level = mapped.analysis.max_level
    level_nodes: dict[int, list[int]] = {}
    for node_id in mapped.analysis.operation_sequence:
        level_nodes.setdefault(dfg.level[node_id], []).append(node_id)

    pair_lines: list[tuple[int, int]] = []
    for first, second in mapped.loading.cycles:
        dataa = BitVec.from_int(inputs[first], 32).bits
        datab = BitVec.from_int(inputs[second], 32).bits if second else 0
        pair_lines.append((dataa, datab))

    limit = stim.max_cycles
    if limit is None:
        limit = stim.start_cycle + 4 * (done_target + 2) + \
            len(stim.clk_en_low) + len(stim.reset_cycles) + 8

    regs = net.initial_regs()
    cnt = 0
    done = False
    started = False      # a start pulse was consumed at an earlier edge
    enabled_count = 0    # enabled cycles completed since the start cycle
    rows = [] if record else None
    observed: SimResult | None = None
    drain = 2 if record else 0   # post-done cycles kept in the trace

    for cycle in range(limit + 1):
        reset = cycle in stim.reset_cycles
        clk_en = cycle not in stim.clk_en_low
        wants_start = (not started and not reset and cycle >= stim.start_cycle) \
            or cycle in stim.extra_start_cycles
        pair_index = min(enabled_count, loads - 1) if started else 0
        dataa, datab = pair_lines[pair_index]

        if stim.strict and wants_start and clk_en and not reset and cnt != 0:
            raise ProtocolViolation(
                f"start asserted at cycle {cycle} while busy (cnt={cnt})")

        if rows is not None:
            try:
                row_result = net.result_port(regs).bits
            except DivideByZero:
                row_result = None
            row_regs = {"cnt": cnt}
            row_regs.update((name, bv.bits) for name, bv in regs.items())
            rows.append({
                "cycle": cycle, "clk_en": int(clk_en),
                "start": int(wants_start), "dataa": dataa, "datab": datab,
                "regs": row_regs, "done": int(done), "result": row_result,
            })

        if observed is not None:
            if cycle >= observed.done_cycle + drain:
                observed.rows = rows or []
                return observed
        elif done and clk_en and not reset:
            try:
                final = net.result_port(regs)
            except DivideByZero as exc:
                raise DivideByZero(
                    f"zero divisor reached the result port: {exc}",
                    cycle=enabled_count) from exc
            observed = SimResult(final, cycle, enabled_count)
            if drain == 0:
                observed.rows = rows or []
                return observed

        # clock edge
        if reset:
            regs = net.initial_regs()
            cnt = 0
            done = False
            started = False
            enabled_count = 0
            continue
        if not clk_en:
            continue

        if cnt == 0:
            if wants_start:
                _latch_pair(regs, spec, mapped, 0, dataa, datab)
                done = done_target == 1
                cnt = 1
                started = True
                enabled_count = 1
            else:
                done = False
        else:
            if cnt < loads:
                _latch_pair(regs, spec, mapped, cnt, dataa, datab)
            elif max_level >= 1:
                stage = cnt - loads + 1
                for node_id in level_nodes.get(stage, ()):
                    try:
                        regs[node_reg(node_id)] = net.node_output(regs, node_id)
                    except DivideByZero as exc:
                        raise DivideByZero(
                            f"zero divisor latched on enabled cycle "
                            f"{enabled_count}: {exc}",
                            cycle=enabled_count, node=node_id) from exc
            done = cnt == done_target - 1
            cnt = cnt + 1 if cnt < done_target else 0
            enabled_count += 1

    if observed is not None:
        observed.rows = rows or []
        return observed
    raise InternalCheckError(
        f"done never observed within {limit} cycles for {spec.name}")


def _latch_pair(regs: dict[str, BitVec], spec: CiSpec, mapped: MappedDesign,
                pair: int, dataa: int, datab: int) -> None:
    first, second = mapped.loading.cycles[pair]
    regs[input_reg(first)] = BitVec.from_int(dataa, spec.input_by_name(first).width)
    if second is not None:
        regs[input_reg(second)] = BitVec.from_int(datab, spec.input_by_name(second).width)


def check_equivalence(spec: CiSpec, mapped: MappedDesign | None = None,
                      vectors: list[dict[str, int]] | None = None,
                      stimulus: Stimulus | None = None) -> list[dict]:
    """Compare the netlist simulation against the reference evaluator.

    Returns one record per disagreement: differing result bits, a division
    fault on one side only, or a done pulse off its scheduled cycle.  An
    empty list means every vector matched bit for bit.
    """
    if mapped is None:
        mapped = map_design(spec)
    if not vectors:
        return []
    mismatches = []
    expected_done = done_cycle_enabled(mapped)
    for vec in vectors:
        want: BitVec | None
        got: BitVec | None
        try:
            want = eval_reference(spec, vec, dfg=mapped.dfg)
        except DivideByZero:
            want = None
        sim = None
        try:
            sim = simulate_ci(spec, vec, mapped, stimulus, record=False)
            got = sim.result
        except DivideByZero:
            got = None
        if want is not None and got is not None:
            if want.bits != got.bits:
                mismatches.append({"inputs": dict(vec),
                                   "reference": want.bits, "simulated": got.bits})
            elif sim is not None and sim.done_cycle_enabled != expected_done:
                mismatches.append({"inputs": dict(vec),
                                   "done_cycle": sim.done_cycle_enabled,
                                   "expected_done_cycle": expected_done})
        elif (want is None) != (got is None):
            mismatches.append({
                "inputs": dict(vec),
                "reference": "divide-by-zero" if want is None else want.bits,
                "simulated": "divide-by-zero" if got is None else got.bits})
    return mismatches
