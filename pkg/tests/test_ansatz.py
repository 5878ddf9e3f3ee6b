import numpy as np
import pytest

from hqreg.ansatz import (
    AnsatzSpec,
    init_ansatz_params,
    param_count,
    rotation_layers,
    strongly_entangling_layers,
)
from hqreg.exceptions import ContractError
from hqreg.statevector import Slot


def gate_summary(program):
    return [(g.kind, g.wires) for g in program.instructions]


def test_two_wire_single_layer_layout():
    program = strongly_entangling_layers(AnsatzSpec(2, 1))
    assert program.n_params == 6
    assert gate_summary(program) == [
        ("rot", (0,)),
        ("rot", (1,)),
        ("cnot", (0, 1)),
        ("cnot", (1, 0)),
    ]


def test_ring_stride_grows_with_layer():
    program = strongly_entangling_layers(AnsatzSpec(4, 2))
    summary = gate_summary(program)
    # layer 0: stride 1
    assert summary[4:8] == [("cnot", (0, 1)), ("cnot", (1, 2)), ("cnot", (2, 3)), ("cnot", (3, 0))]
    # layer 1: stride 2
    assert summary[12:16] == [("cnot", (0, 2)), ("cnot", (1, 3)), ("cnot", (2, 0)), ("cnot", (3, 1))]


def test_stride_wraps_around():
    # three layers on three wires: strides 1, 2, then back to 1
    program = strongly_entangling_layers(AnsatzSpec(3, 3))
    summary = [s for s in gate_summary(program) if s[0] == "cnot"]
    assert summary[0:3] == [("cnot", (0, 1)), ("cnot", (1, 2)), ("cnot", (2, 0))]
    assert summary[3:6] == [("cnot", (0, 2)), ("cnot", (1, 0)), ("cnot", (2, 1))]
    assert summary[6:9] == [("cnot", (0, 1)), ("cnot", (1, 2)), ("cnot", (2, 0))]


def test_param_count_and_slot_layout():
    spec = AnsatzSpec(3, 2)
    assert param_count(spec) == 18
    program = strongly_entangling_layers(spec)
    slots = [s for g in program.instructions for s in g.slot_indices()]
    # C-order flattening of a (layers, wires, 3) tensor: slots appear in order
    assert slots == list(range(18))


def test_single_wire_has_no_entanglers():
    program = strongly_entangling_layers(AnsatzSpec(1, 2))
    assert all(g.kind == "rot" for g in program.instructions)
    assert program.n_params == 6


def test_cz_entangler():
    program = strongly_entangling_layers(AnsatzSpec(2, 1, entangler="cz"))
    assert gate_summary(program)[2:] == [("cz", (0, 1)), ("cz", (1, 0))]


def test_rotation_layers_variant():
    spec = AnsatzSpec(3, 2)
    program = rotation_layers(spec)
    assert all(g.kind == "rot" for g in program.instructions)
    assert program.n_params == 18
    assert len(program) == 6


def test_rotation_layers_product_state():
    from hqreg.statevector import single_qubit_purity

    spec = AnsatzSpec(3, 2)
    rng = np.random.default_rng(3)
    state = rotation_layers(spec).run(init_ansatz_params(spec, rng))
    for wire in range(3):
        assert single_qubit_purity(state, wire) == pytest.approx(1.0, abs=1e-12)


def test_run_preserves_norm():
    spec = AnsatzSpec(4, 3)
    rng = np.random.default_rng(9)
    state = strongly_entangling_layers(spec).run(init_ansatz_params(spec, rng))
    assert state.norm() == pytest.approx(1.0, abs=1e-12)


def test_init_params_range_and_determinism():
    spec = AnsatzSpec(5, 2)
    a = init_ansatz_params(spec, np.random.default_rng(1))
    b = init_ansatz_params(spec, np.random.default_rng(1))
    np.testing.assert_array_equal(a, b)
    assert a.shape == (30,)
    assert np.all(a >= 0.0) and np.all(a < 2.0 * np.pi)


def test_spec_validation():
    with pytest.raises(ContractError):
        AnsatzSpec(0, 1)
    with pytest.raises(ContractError):
        AnsatzSpec(2, 0)
    with pytest.raises(ContractError):
        AnsatzSpec(2, 1, entangler="swap")


def test_first_gate_uses_slot_zero():
    program = strongly_entangling_layers(AnsatzSpec(2, 1))
    assert program.instructions[0].params[0] == Slot(0)
