"""Sparse state: branch bookkeeping, measurements, register plumbing."""

import math
import random

import pytest

from bqcsim.bits import dot
from bqcsim.state import ATOL, EntangledDiscardError, SparseState, gadget_state


def test_gadget_normalized_superposition():
    st = SparseState()
    st.add_gadget("g", "000", "111")
    assert abs(st.norm() - 1) < ATOL
    assert set(st.branches) == {("000",), ("111",)}
    for amp in st.branches.values():
        assert abs(amp - 1 / math.sqrt(2)) < ATOL


def test_gadget_rejects_equal_or_mismatched_keys():
    st = SparseState()
    with pytest.raises(ValueError):
        st.add_gadget("g", "01", "01")
    with pytest.raises(ValueError):
        st.add_gadget("g", "01", "011")


def test_tensor_of_two_gadgets_has_four_branches():
    st = gadget_state([("a", "00", "11"), ("b", "0", "1")])
    assert len(st.branches) == 4
    assert abs(st.norm() - 1) < ATOL


def test_measure_computational_collapses():
    rng = random.Random(0)
    st = SparseState()
    st.add_gadget("g", "0011", "1100")
    out = st.measure_computational("g", rng)
    assert out in {"0011", "1100"}
    assert set(st.branches) == {(out,)}
    assert abs(st.norm() - 1) < ATOL


def test_measure_computational_born_rule():
    counts = {"00": 0, "11": 0}
    for seed in range(400):
        st = SparseState()
        st.add_gadget("g", "00", "11")
        counts[st.measure_computational("g", random.Random(seed))] += 1
    assert 140 < counts["00"] < 260  # ~Bin(400, 1/2)


def test_hadamard_measure_respects_gadget_parity():
    # interference forbids any d with d.(x0 xor x1) = 1
    for seed in range(100):
        rng = random.Random(seed)
        st = SparseState()
        st.add_gadget("g", "010110", "101001")
        d = st.measure_hadamard("g", rng)
        assert len(d) == 6
        assert dot(d, "010110") == dot(d, "101001")
        assert st.registers == []


def test_hadamard_measure_outcomes_cover_allowed_set():
    seen = set()
    for seed in range(300):
        st = SparseState()
        st.add_gadget("g", "00", "11")
        seen.add(st.measure_hadamard("g", random.Random(seed)))
    assert seen == {"00", "11"}  # exactly the d with d.(11) = 0


def test_hadamard_measure_applies_residual_phase():
    # measuring one register of an entangled pair leaves (-1)^(d.s) behind
    rng = random.Random(5)
    st = SparseState()
    st.add_gadget("a", "0", "1")
    st.add_register("b", "0")
    st.map_multi(["a"], ["b"], lambda k, o: (k[0],))  # copy: |00> + |11>
    d = st.measure_hadamard("a", rng)
    amps = {k[0]: v for k, v in st.branches.items()}
    expect = -1.0 if d == "1" else 1.0
    ratio = amps["1"] / amps["0"]
    assert abs(ratio - expect) < 1e-9


def test_split_merge_roundtrip():
    st = SparseState()
    st.add_gadget("g", "0101", "1010")
    before = dict(st.branches)
    st.split_register("g", [1, 3], ["hi", "lo"])
    assert st.width("hi") == 1 and st.width("lo") == 3
    st.merge_registers(["hi", "lo"], "g")
    assert st.branches == before


def test_discard_constant_register():
    st = SparseState()
    st.add_gadget("g", "01", "10")
    st.add_register("z", "000")
    st.discard_register("z")
    assert [n for n, _ in st.registers] == ["g"]
    assert abs(st.norm() - 1) < ATOL


def test_discard_entangled_register_refuses():
    st = SparseState()
    st.add_gadget("a", "0", "1")
    st.add_register("b", "0")
    st.map_multi(["a"], ["b"], lambda k, o: (k[0],))
    with pytest.raises(EntangledDiscardError):
        st.discard_register("b")


def test_discard_product_register():
    # unentangled but not constant: a separate gadget factors out
    st = gadget_state([("a", "00", "11"), ("b", "0", "1")])
    st.discard_register("b")
    assert set(st.branches) == {("00",), ("11",)}
    assert abs(st.norm() - 1) < ATOL


def test_extract_qubit_amplitudes():
    st = SparseState()
    st.add_gadget("q", "0", "1")
    st.apply_phase_per_branch("q", lambda v: math.pi / 2 if v == "1" else 0.0)
    a, b = st.extract_qubit("q")
    assert abs(a - 1 / math.sqrt(2)) < 1e-9
    assert abs(b - 1j / math.sqrt(2)) < 1e-9


def test_fidelity_matches_by_name_not_order():
    st1 = gadget_state([("a", "0", "1"), ("b", "00", "11")])
    st2 = gadget_state([("b", "00", "11"), ("a", "0", "1")])
    assert abs(st1.fidelity(st2) - 1) < 1e-12
    st3 = gadget_state([("a", "0", "1"), ("b", "00", "10")])
    assert st1.fidelity(st3) < 1


def test_map_pair_rejects_width_change():
    st = SparseState()
    st.add_gadget("a", "0", "1")
    st.add_register("b", "00")
    with pytest.raises(ValueError):
        st.map_pair("a", "b", lambda x, y: "0")


def test_bitwise_permutation_and_inverse():
    from bqcsim.bits import invert_perm

    st = SparseState()
    st.add_gadget("g", "0011", "1100")
    perm = [2, 0, 3, 1]
    before = dict(st.branches)
    st.apply_bitwise_permutation("g", perm)
    st.apply_bitwise_permutation("g", invert_perm(perm))
    assert st.branches == before
