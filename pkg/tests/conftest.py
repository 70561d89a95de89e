"""Shared fixtures: the worked-example spec in two width flavors."""

from pathlib import Path

import pytest

from cigen.frontend import parse_ci_spec
from cigen.mapper import map_design

GOLDEN_DIR = Path(__file__).parent / "golden"

# Three 32-bit signed operands, multiply-accumulate.  All widths equal, so
# the mapped design needs no width adapters and the emitted file has no
# support entity.  Golden artifacts are frozen from this exact text.
MAC_TEXT = """\
ci f(opcode=0) {
  input a: signed<32>;
  input b: signed<32>;
  input c: signed<32>;
  output X: signed<32>;
  X = (a * b) + c;
}
"""

# Same expression at 8 bits with a 16-bit product, so the adder needs one
# widening adapter and the output path truncates.
NARROW_TEXT = """\
ci g(opcode=1) {
  input a: signed<8>;
  input b: signed<8>;
  input c: signed<8>;
  output y: signed<16>;
  y = (a * b) + c;
}
"""


@pytest.fixture
def mac_spec():
    return parse_ci_spec(MAC_TEXT)


@pytest.fixture
def mac_mapped(mac_spec):
    return map_design(mac_spec)


@pytest.fixture
def narrow_spec():
    return parse_ci_spec(NARROW_TEXT)


@pytest.fixture
def narrow_mapped(narrow_spec):
    return map_design(narrow_spec)


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR
