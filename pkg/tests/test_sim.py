"""Reference evaluator and cycle-accurate netlist simulation."""

import dataclasses
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cigen.errors import (
    DivideByZero,
    InputOutOfRange,
    InternalCheckError,
    ProtocolViolation,
)
from cigen.frontend import parse_ci_spec
from cigen.fuzz import FuzzConfig, random_spec, random_vectors
from cigen.lpm import AddSubGenerics, Direction
from cigen.mapper import done_cycle_enabled, map_design
from cigen.sim import (
    Stimulus,
    check_equivalence,
    eval_reference,
    simulate_ci,
    validate_inputs,
)

MAC_INPUTS = {"a": 2, "b": 3, "c": 4}


def _spec(body: str):
    return parse_ci_spec(f"ci t(opcode=0) {{ {body} }}")


class TestValidateInputs:
    @pytest.fixture
    def spec(self):
        return _spec("input s: signed<8>; input u: unsigned<8>;"
                     "output x: signed<8>; x = s + u;")

    def test_accepts_full_ranges(self, spec):
        validate_inputs(spec, {"s": -128, "u": 255})
        validate_inputs(spec, {"s": 127, "u": 0})

    @pytest.mark.parametrize("inputs", [
        {"s": 128, "u": 0},
        {"s": -129, "u": 0},
        {"s": 0, "u": 256},
        {"s": 0, "u": -1},
        {"s": 0},
        {"s": 0, "u": 0, "ghost": 1},
    ])
    def test_rejects(self, spec, inputs):
        with pytest.raises(InputOutOfRange):
            validate_inputs(spec, inputs)


class TestReference:
    def test_worked_example(self, mac_spec):
        assert eval_reference(mac_spec, MAC_INPUTS).bits == 10

    def test_negative_product_widens(self):
        spec = _spec("input a: signed<8>; input b: signed<8>;"
                     "output x: signed<16>; x = a * b;")
        assert eval_reference(spec, {"a": -1, "b": -1}).bits == 1

    def test_divide_by_zero_names_the_node(self):
        spec = _spec("input a: signed<8>; input b: signed<8>;"
                     "output x: signed<8>; x = a / b;")
        with pytest.raises(DivideByZero) as info:
            eval_reference(spec, {"a": 5, "b": 0})
        assert info.value.node is not None

    def test_truncation_to_output_width(self):
        spec = _spec("input a: unsigned<8>; input b: unsigned<8>;"
                     "output x: unsigned<4>; x = a * b;")
        # 20 * 13 = 260 = 0x104 at 16 bits; output keeps the low 4.
        assert eval_reference(spec, {"a": 20, "b": 13}).bits == 0x4


class TestSimulateWorkedExample:
    def test_result_and_done(self, mac_spec, mac_mapped):
        out = simulate_ci(mac_spec, MAC_INPUTS, mac_mapped)
        assert out.result.bits == 10
        assert out.done_cycle == 3
        assert out.done_cycle_enabled == 3

    def test_trace_rows(self, mac_spec, mac_mapped):
        out = simulate_ci(mac_spec, MAC_INPUTS, mac_mapped)
        assert [row["cycle"] for row in out.rows] == [0, 1, 2, 3, 4, 5]
        for row in out.rows:
            assert set(row) == {"cycle", "clk_en", "start", "dataa", "datab",
                                "regs", "done", "result"}
            assert "cnt" in row["regs"]
        done_rows = [r for r in out.rows if r["done"]]
        assert len(done_rows) == 1
        assert done_rows[0]["cycle"] == 3
        assert done_rows[0]["result"] == 10
        # start only on the first cycle; counter wraps after done
        assert [r["start"] for r in out.rows] == [1, 0, 0, 0, 0, 0]
        assert out.rows[4]["regs"]["cnt"] == 0

    def test_register_timeline(self, mac_spec, mac_mapped):
        rows = simulate_ci(mac_spec, MAC_INPUTS, mac_mapped).rows
        # pair (a,b) latches at the end of cycle 0, c one cycle later,
        # the product at the end of cycle 2
        assert rows[0]["regs"]["r_a"] == 0
        assert rows[1]["regs"]["r_a"] == 2
        assert rows[1]["regs"]["r_b"] == 3
        assert rows[1]["regs"]["r_c"] == 0
        assert rows[2]["regs"]["r_c"] == 4
        assert rows[2]["regs"]["s_1"] == 0
        assert rows[3]["regs"]["s_1"] == 6

    def test_record_flag_controls_rows(self, mac_spec, mac_mapped):
        assert simulate_ci(mac_spec, MAC_INPUTS, mac_mapped,
                           record=False).rows == []


class TestStimulus:
    def test_clk_en_gaps_shift_only_absolute_time(self, mac_spec, mac_mapped):
        stim = Stimulus(clk_en_low={1, 2, 5})
        out = simulate_ci(mac_spec, MAC_INPUTS, mac_mapped, stim)
        assert out.result.bits == 10
        assert out.done_cycle_enabled == 3
        assert out.done_cycle == 6

    def test_registers_hold_through_gaps(self, mac_spec, mac_mapped):
        stim = Stimulus(clk_en_low={1, 2, 5})
        rows = simulate_ci(mac_spec, MAC_INPUTS, mac_mapped, stim).rows
        for i, row in enumerate(rows[:-1]):
            if not row["clk_en"]:
                assert rows[i + 1]["regs"] == row["regs"]

    def test_reset_mid_flight_restarts(self, mac_spec, mac_mapped):
        stim = Stimulus(reset_cycles={2})
        out = simulate_ci(mac_spec, MAC_INPUTS, mac_mapped, stim)
        assert out.result.bits == 10
        assert out.done_cycle == 6  # 2 wasted cycles + reset cycle itself
        after_reset = out.rows[3]["regs"]
        assert all(v == 0 for v in after_reset.values())

    def test_start_while_busy_is_a_protocol_violation(self, mac_spec,
                                                      mac_mapped):
        stim = Stimulus(extra_start_cycles={1})
        with pytest.raises(ProtocolViolation):
            simulate_ci(mac_spec, MAC_INPUTS, mac_mapped, stim)

    def test_lenient_mode_ignores_busy_start(self, mac_spec, mac_mapped):
        stim = Stimulus(extra_start_cycles={1}, strict=False)
        out = simulate_ci(mac_spec, MAC_INPUTS, mac_mapped, stim)
        assert out.result.bits == 10
        assert out.done_cycle_enabled == 3

    def test_delayed_start(self, mac_spec, mac_mapped):
        out = simulate_ci(mac_spec, MAC_INPUTS, mac_mapped,
                          Stimulus(start_cycle=4))
        assert out.done_cycle == 7
        assert out.done_cycle_enabled == 3

    def test_never_done_is_an_internal_error(self, mac_spec, mac_mapped):
        stim = Stimulus(clk_en_low=frozenset(range(64)), max_cycles=10)
        with pytest.raises(InternalCheckError):
            simulate_ci(mac_spec, MAC_INPUTS, mac_mapped, stim)


class TestSimulatedFaults:
    def test_interior_divide_fault_carries_stage_cycle(self):
        spec = _spec("input a: signed<8>; input b: signed<8>;"
                     "input c: signed<8>; output x: signed<8>;"
                     "x = (a / b) + c;")
        with pytest.raises(DivideByZero) as info:
            simulate_ci(spec, {"a": 5, "b": 0, "c": 1})
        # k=3 loads twice, the divider latches at enabled cycle 2
        assert info.value.cycle == 2
        assert info.value.node is not None

    def test_root_divide_fault_at_done_cycle(self):
        spec = _spec("input a: signed<8>; input b: signed<8>;"
                     "output x: signed<8>; x = a / b;")
        with pytest.raises(DivideByZero) as info:
            simulate_ci(spec, {"a": 5, "b": 0})
        assert info.value.cycle == 1

    def test_fault_matches_reference(self):
        spec = _spec("input a: signed<8>; input b: signed<8>;"
                     "output x: signed<8>; x = a % b;")
        assert check_equivalence(spec, vectors=[{"a": 5, "b": 0}]) == []


class TestIdentity:
    def test_done_one_cycle_after_single_load(self):
        spec = _spec("input a: signed<8>; output x: signed<32>; x = a;")
        out = simulate_ci(spec, {"a": -3})
        assert out.done_cycle_enabled == 1
        assert out.result.bits == 0xFFFFFFFD
        done_rows = [r for r in out.rows if r["done"]]
        assert [r["cycle"] for r in done_rows] == [1]


class TestEquivalence:
    def test_worked_example_vectors(self, mac_spec, mac_mapped):
        rng = random.Random(7)
        vectors = random_vectors(rng, mac_spec, 100)
        assert check_equivalence(mac_spec, mac_mapped, vectors) == []

    def test_corrupted_direction_is_caught(self, mac_spec, mac_mapped):
        add = next(i for i in mac_mapped.instances
                   if isinstance(i.generics, AddSubGenerics))
        flipped = dataclasses.replace(
            add, generics=AddSubGenerics(add.generics.width, Direction.SUB))
        corrupted = dataclasses.replace(
            mac_mapped,
            instances=tuple(flipped if i is add else i
                            for i in mac_mapped.instances))
        vectors = [dict(MAC_INPUTS), {"a": 1, "b": 1, "c": 1}]
        mismatches = check_equivalence(mac_spec, corrupted, vectors)
        assert mismatches
        assert {"inputs", "reference", "simulated"} <= set(mismatches[0])

    def test_divide_fault_on_one_side_only_is_caught(self, mac_spec,
                                                     mac_mapped):
        # Same shape as the corrupted-direction case but for fault parity:
        # the reference sees a zero divisor, the corrupted netlist does not.
        spec = _spec("input a: signed<8>; input b: signed<8>;"
                     "output x: signed<8>; x = a / b;")
        mapped = map_design(spec)
        records = check_equivalence(spec, mapped,
                                    [{"a": 1, "b": 0}, {"a": 1, "b": 1}])
        assert records == []


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_simulation_matches_reference(self, seed):
        rng = random.Random(seed)
        spec = random_spec(rng, "p", FuzzConfig(max_inputs=5, max_depth=3))
        mapped = map_design(spec)
        vectors = random_vectors(rng, spec, 12)
        assert check_equivalence(spec, mapped, vectors) == []

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sets(st.integers(0, 20), max_size=6))
    def test_gating_never_changes_the_result(self, seed, gaps):
        rng = random.Random(seed)
        spec = random_spec(rng, "p", FuzzConfig(max_inputs=4, max_depth=3))
        mapped = map_design(spec)
        vec = random_vectors(rng, spec, 1)[0]
        try:
            plain = simulate_ci(spec, vec, mapped, record=False)
        except DivideByZero:
            return
        gated = simulate_ci(spec, vec, mapped, Stimulus(clk_en_low=gaps),
                            record=False)
        assert gated.result.bits == plain.result.bits
        assert gated.done_cycle_enabled == plain.done_cycle_enabled \
            == done_cycle_enabled(mapped)
        assert gated.done_cycle >= plain.done_cycle
