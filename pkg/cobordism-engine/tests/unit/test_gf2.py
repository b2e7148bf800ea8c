import importlib

import numpy as np
import pytest

gf2 = importlib.import_module("cobordism.gf2")

BitVector = gf2.BitVector
BitMatrix = gf2.BitMatrix


def test_bitvector_arithmetic_is_mod_two():
    a = BitVector.from_string("1100")
    b = BitVector.from_string("1010")
    assert (a + b).to_string() == "0110"
    assert (a & b).to_string() == "1000"
    assert a.dot(b) == 1
    assert (a + a).is_zero()
    assert sum([a, b, a]) == b


def test_bitvector_int_and_index_views_agree():
    v = BitVector.from_indices(6, [0, 3, 3, 5])
    # repeated indices cancel
    assert v.support() == (0, 5)
    assert v.to_int() == 0b100001
    assert BitVector.from_int(v.to_int(), 6) == v
    assert v.weight == 2


def test_bitvector_rejects_bad_input():
    with pytest.raises(gf2.GF2Error):
        BitVector.from_string("012")
    with pytest.raises(gf2.GF2Error):
        BitVector.from_indices(3, [3])
    with pytest.raises(gf2.GF2Error):
        BitVector.from_string("10") + BitVector.from_string("101")


def test_solve_sets_free_columns_to_zero():
    A = BitMatrix([[1, 1, 0], [0, 1, 1]])
    x = gf2.solve(A, BitVector.from_string("10"))
    assert x is not None
    assert A @ x == BitVector.from_string("10")
    # column 2 is free
    assert x[2] == 0


def test_solve_reports_inconsistent_systems():
    A = BitMatrix([[1, 1], [1, 1]])
    assert gf2.solve(A, BitVector.from_string("10")) is None


def test_rank_and_kernel_dimension_add_up(np_rng):
    for _ in range(25):
        rows, cols = np_rng.integers(1, 9, size=2)
        A = BitMatrix(np_rng.integers(0, 2, size=(rows, cols)))
        kernel = gf2.kernel_basis(A)
        assert gf2.rank(A) + len(kernel) == A.cols
        for v in kernel:
            assert (A @ v).is_zero()
        if kernel:
            assert gf2.rank(BitMatrix.from_columns(kernel, A.cols)) == len(kernel)


def test_rref_pivots_on_lowest_row():
    A = BitMatrix([[0, 1], [1, 0], [1, 1]])
    result = gf2.rref(A)
    assert result.rank == 2
    assert result.pivots == [0, 1]
    assert result.matrix.row(0) == BitVector.from_string("10")
    assert result.matrix.row(1) == BitVector.from_string("01")
    assert result.matrix.row(2).is_zero()


def test_span_solver_coordinates_and_membership():
    vectors = [BitVector.from_string("1100"), BitVector.from_string("0110")]
    solver = gf2.SpanSolver(vectors, 4)
    assert solver.coordinates(BitVector.from_string("1010")) == BitVector.from_string("11")
    assert solver.contains(BitVector.from_string("0110"))
    assert not solver.contains(BitVector.from_string("0001"))
    with pytest.raises(gf2.GF2Error):
        solver.coordinates(BitVector.from_string("0001"))


def test_span_solver_rejects_dependent_vectors():
    v = BitVector.from_string("101")
    with pytest.raises(gf2.GF2Error):
        gf2.SpanSolver([v, v], 3)


def test_quotient_of_circle_boundary():
    # a triangle's edges: cycles are spanned by the whole loop, no boundaries
    loop = BitVector.from_string("111")
    q = gf2.quotient_basis([loop], [], length=3)
    assert q.basis == [loop]
    assert q.coords(loop) == BitVector.from_string("1")

    # filling the triangle kills the class
    q = gf2.quotient_basis([loop], [loop], length=3)
    assert q.basis == []
    assert q.coords(loop).length == 0


def test_quotient_coordinates_ignore_boundaries(np_rng):
    length = 8
    boundaries = [BitVector(np_rng.integers(0, 2, size=length)) for _ in range(3)]
    extra = [BitVector(np_rng.integers(0, 2, size=length)) for _ in range(3)]
    cycles = boundaries + extra
    q = gf2.quotient_basis(cycles, boundaries, length=length)
    for z in cycles:
        for b in boundaries:
            assert q.coords(z + b) == q.coords(z)
    for b in boundaries:
        assert q.coords(b).is_zero()


def test_quotient_requires_boundaries_inside_cycles():
    with pytest.raises(gf2.GF2Error):
        gf2.quotient_basis([BitVector.from_string("10")], [BitVector.from_string("01")])


def test_matrix_products_reduce_mod_two():
    A = BitMatrix(np.ones((3, 3), dtype=np.uint8))
    assert (A @ A) == A
    assert (BitMatrix.identity(3) @ A) == A
    with pytest.raises(gf2.GF2Error):
        A @ BitVector.zeros(2)


def test_small_systems():
    assert gf2.rref(BitMatrix([[1, 1], [1, 1]])).matrix == BitMatrix([[1, 1], [0, 0]])
    assert gf2.solve(BitMatrix([[1, 1]]), BitVector.from_string("1")) == BitVector.from_string("10")
    assert gf2.kernel_basis(BitMatrix([[1, 1, 0], [0, 0, 1]])) == [BitVector.from_string("110")]


def test_solve_agrees_with_the_image(np_rng):
    for _ in range(200):
        rows, cols = (int(v) for v in np_rng.integers(1, 7, size=2))
        A = BitMatrix(np_rng.integers(0, 2, size=(rows, cols)))
        image = {(A @ BitVector.from_int(mask, cols)).to_int() for mask in range(1 << cols)}
        b = BitVector(np_rng.integers(0, 2, size=rows))
        x = gf2.solve(A, b)
        if b.to_int() in image:
            assert x is not None
            assert A @ x == b
        else:
            assert x is None


def test_rref_is_idempotent(np_rng):
    for _ in range(50):
        rows, cols = (int(v) for v in np_rng.integers(1, 9, size=2))
        first = gf2.rref(BitMatrix(np_rng.integers(0, 2, size=(rows, cols))))
        second = gf2.rref(first.matrix)
        assert second.matrix == first.matrix
        assert second.pivots == first.pivots
