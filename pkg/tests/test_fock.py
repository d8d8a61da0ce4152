import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_fermion, dense_pauli, kron_qubits, PAULI
from tfdforge.errors import ContractViolation, ResourceLimitError
from tfdforge.fock import (
    FermionOperator,
    FermionTerm,
    FockState,
    PauliString,
    apply_fermion_term,
    apply_pauli,
    build_sparse,
    embed_doubled,
    fermion_term,
    jordan_wigner,
    pauli_sum_to_sparse,
)
from tfdforge.models import HubbardParams, hubbard_real


def _op(n, *terms):
    return FermionOperator(n, [fermion_term(c, s) for c, s in terms])


@st.composite
def fermion_operators(draw, n_modes, hermitian=True):
    n = draw(n_modes) if not isinstance(n_modes, int) else n_modes
    terms = []
    for _ in range(draw(st.integers(1, 5))):
        k = draw(st.sampled_from([0, 1, 2, 3, 4]))
        factors = tuple((draw(st.integers(0, n - 1)), draw(st.booleans())) for _ in range(k))
        re = draw(st.floats(-2, 2))
        im = draw(st.floats(-2, 2))
        terms.append(FermionTerm(complex(re, im), factors))
    op = FermionOperator(n, terms)
    return op + op.adjoint() if hermitian else op


class TestFockState:
    def test_bits_must_fit(self):
        with pytest.raises(ContractViolation):
            FockState(8, 3)

    def test_occupations_roundtrip(self):
        s = FockState.from_occupations([1, 0, 1])
        assert s.bits == 0b101
        assert s.occupations() == (1, 0, 1)
        assert s.particle_number == 2


class TestApplyTerm:
    def test_creation_on_vacuum(self):
        assert apply_fermion_term(fermion_term(1, "0^"), FockState(0, 3)) == (1, FockState(1, 3))

    def test_annihilating_empty_mode(self):
        assert apply_fermion_term(fermion_term(1, "0"), FockState(0, 3)) is None

    def test_creation_on_filled_mode(self):
        assert apply_fermion_term(fermion_term(1, "1^"), FockState(0b10, 2)) is None

    def test_order_of_creations_flips_phase(self):
        vac = FockState(0, 2)
        ph_a, st_a = apply_fermion_term(fermion_term(1, "1^ 0^"), vac)
        ph_b, st_b = apply_fermion_term(fermion_term(1, "0^ 1^"), vac)
        assert st_a == st_b == FockState(0b11, 2)
        assert ph_a == -ph_b
        # dense oracle: a†_1 a†_0 |00> has amplitude ph_a on |11>
        dense = dense_fermion(_op(2, (1, "1^ 0^")))
        assert dense[0b11, 0] == ph_a

    def test_mode_out_of_range(self):
        with pytest.raises(ContractViolation):
            apply_fermion_term(fermion_term(1, "3"), FockState(0, 2))

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(2, 5), data=st.data())
    def test_anticommutation(self, n, data):
        i = data.draw(st.integers(0, n - 1))
        j = data.draw(st.integers(0, n - 1).filter(lambda x: x != i))
        bits = data.draw(st.integers(0, (1 << n) - 1))
        s = FockState(bits, n)
        a = apply_fermion_term(FermionTerm(1, ((i, True), (j, True))), s)
        b = apply_fermion_term(FermionTerm(1, ((j, True), (i, True))), s)
        assert (a is None) == (b is None)
        if a is not None:
            assert a[1] == b[1] and a[0] == -b[0]


class TestBuildSparse:
    def test_number_operator(self):
        m = build_sparse(_op(1, (1, "0^ 0"))).toarray()
        np.testing.assert_array_equal(m, np.diag([0, 1]))

    def test_hubbard_equals_sum_of_term_matrices(self):
        op = hubbard_real(HubbardParams(4, t=1.0, eps0=0.3, U=0.7))
        total = sum(dense_fermion(FermionOperator(4, [t])) for t in op.terms)
        np.testing.assert_allclose(build_sparse(op).toarray(), total, atol=1e-14)

    def test_matches_scalar_action(self, rng):
        op = _op(3, (0.5, "2^ 0"), (1j, "1^ 2^ 2 0"), (2, "1"))
        mat = build_sparse(op).toarray()
        for b in range(8):
            col = np.zeros(8, dtype=complex)
            for t in op.terms:
                res = apply_fermion_term(t, FockState(b, 3))
                if res is not None:
                    col[res[1].bits] += t.coefficient * res[0]
            np.testing.assert_allclose(mat[:, b], col)

    def test_qubit_cap(self):
        with pytest.raises(ResourceLimitError):
            build_sparse(_op(5, (1, "0^ 0")), cap=4)

    @settings(max_examples=40, deadline=None)
    @given(fermion_operators(st.integers(1, 6)))
    def test_hermitian_input_gives_hermitian_matrix(self, op):
        m = build_sparse(op).toarray()
        np.testing.assert_allclose(m, m.conj().T, atol=1e-12)

    def test_identity_term(self):
        m = build_sparse(FermionOperator(2, [FermionTerm(2.5, ())])).toarray()
        np.testing.assert_array_equal(m, 2.5 * np.eye(4))


class TestJordanWigner:
    def test_number_operator(self):
        out = {p.letters: p.coefficient for p in jordan_wigner(_op(1, (1, "0^ 0")))}
        assert out == pytest.approx({"I": 0.5, "Z": -0.5})

    def test_adjacent_hopping(self):
        out = {p.letters: p.coefficient for p in jordan_wigner(_op(2, (1, "0^ 1"), (1, "1^ 0")))}
        assert out == pytest.approx({"XX": 0.5, "YY": 0.5})

    def test_skip_z_differs_by_middle_z(self):
        op = _op(3, (1, "0^ 2"), (1, "2^ 0"))
        full = {p.letters: p.coefficient for p in jordan_wigner(op)}
        skip = {p.letters: p.coefficient for p in jordan_wigner(op, skip_z_strings=True)}
        assert len(full) == len(skip) == 2
        for letters, c in skip.items():
            assert letters[1] == "I"
            assert full[letters[0] + "Z" + letters[2]] == pytest.approx(c)
        z1 = kron_qubits([PAULI["I"], PAULI["Z"], PAULI["I"]])
        np.testing.assert_allclose(dense_pauli(jordan_wigner(op, True), 3) @ z1,
                                   dense_pauli(jordan_wigner(op), 3), atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(fermion_operators(st.sampled_from([2, 4]), hermitian=False))
    def test_matches_build_sparse(self, op):
        paulis = jordan_wigner(op)
        np.testing.assert_allclose(dense_pauli(paulis, op.n_modes),
                                   build_sparse(op).toarray(), atol=1e-12)
        np.testing.assert_allclose(pauli_sum_to_sparse(paulis, op.n_modes).toarray(),
                                   dense_fermion(op), atol=1e-12)

    def test_cancelling_terms_dropped(self):
        assert jordan_wigner(_op(2, (1, "0^ 1"), (-1, "0^ 1"))) == []

    def test_strings_sorted(self):
        letters = [p.letters for p in jordan_wigner(hubbard_real(HubbardParams(3, U=1)))]
        assert letters == sorted(letters)


class TestPauli:
    @pytest.mark.parametrize("a,b,expected", [
        ("XX", "YY", True), ("XI", "ZI", False), ("XY", "YX", True), ("ZZ", "XI", False)])
    def test_commutation(self, a, b, expected):
        assert PauliString(1, a).commutes_with(PauliString(1, b)) is expected
        ma, mb = dense_pauli([PauliString(1, a)], 2), dense_pauli([PauliString(1, b)], 2)
        assert np.allclose(ma @ mb, mb @ ma) is expected

    @pytest.mark.parametrize("letters", ["XYZ", "YYI", "ZIY", "III"])
    def test_apply_pauli_matches_dense(self, letters, rng):
        vec = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        np.testing.assert_allclose(apply_pauli(letters, vec),
                                   dense_pauli([PauliString(1, letters)], 3) @ vec)

    def test_invalid_letters(self):
        with pytest.raises(ContractViolation):
            PauliString(1, "XA")


class TestEmbedDoubled:
    def test_left_is_identity_embedding(self):
        out = embed_doubled(_op(2, (1, "0^ 0")), "L")
        assert out.n_modes == 4 and out.terms == (fermion_term(1, "0^ 0"),)

    def test_right_shifts_and_conjugates(self):
        out = embed_doubled(_op(2, (1 + 2j, "0^ 1")), "R")
        assert out.terms == (FermionTerm(1 - 2j, ((2, True), (3, False))),)

    def test_sum_spectrum_is_pairwise_sums(self):
        op = _op(2, (0.7, "0^ 0"), (-0.4, "1^ 1"), (0.3, "0^ 1"), (0.3, "1^ 0"))
        one_side = np.linalg.eigvalsh(dense_fermion(op))
        doubled = embed_doubled(op, "L") + embed_doubled(op, "R")
        expected = np.sort((one_side[:, None] + one_side[None, :]).ravel())
        np.testing.assert_allclose(np.linalg.eigvalsh(build_sparse(doubled).toarray()),
                                   expected, atol=1e-12)

    def test_conjugation_is_involution(self):
        op = _op(2, (1 + 2j, "0^ 1"), (0.5 - 1j, "1^ 0^ 0 1"))
        twice = embed_doubled(op, "R").conjugate_coefficients().conjugate_coefficients()
        assert twice == embed_doubled(op, "R")
        assert op.conjugate_coefficients().conjugate_coefficients() == op

    def test_cross_requires_pair_form(self):
        good = _op(4, (1, "0^ 2^"), (1, "2 0"))
        assert embed_doubled(good, "cross") is good
        with pytest.raises(ContractViolation):
            embed_doubled(_op(4, (1, "0^ 3^")), "cross")

    def test_unknown_side(self):
        with pytest.raises(ContractViolation):
            embed_doubled(_op(2, (1, "0")), "middle")
