import math

import numpy as np
import pytest

from loctrace import (
    KernelOperator,
    TestFunction,
    adjoint,
    compose,
    cutoff_projection,
    hs_inner,
    left_translation,
    singular_values,
    trace,
    u_f,
    u_f_from_translations,
)


def random_op(grid, rng, picture="additive"):
    mat = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    return KernelOperator(grid, mat, picture)


# ----------------------------- projections ---------------------------------


def test_projection_laws(small_grid_r):
    p = cutoff_projection(small_grid_r, 5.0)
    assert np.array_equal(p.matrix @ p.matrix, p.matrix)
    assert np.array_equal(adjoint(p).matrix, p.matrix)
    diag = np.diag(p.matrix)
    assert set(np.unique(diag)) <= {0.0, 1.0}
    assert np.sum(diag) == np.sum(small_grid_r.t <= 5.0)


def test_projection_extremes(small_grid_r):
    ident = cutoff_projection(small_grid_r, small_grid_r.t_max * 2)
    assert np.array_equal(ident.matrix, np.eye(small_grid_r.n))
    assert ident.boundary_clipped
    zero = cutoff_projection(small_grid_r, small_grid_r.t_min / 2)
    assert not zero.matrix.any()
    assert zero.boundary_clipped


def test_projection_includes_boundary_point(small_grid_r):
    lam = float(small_grid_r.t[100])
    p = cutoff_projection(small_grid_r, lam)
    assert p.matrix[100, 100] == 1.0


# ----------------------------- translations --------------------------------


def test_translation_identity(small_grid_r):
    assert np.array_equal(left_translation(small_grid_r, 0.0).matrix, np.eye(small_grid_r.n))


def test_translation_rejects_offgrid_shift(small_grid_r):
    with pytest.raises(ValueError):
        left_translation(small_grid_r, 0.37 * small_grid_r.step)


def test_translation_unitary_on_interior(small_grid_r):
    g = small_grid_r
    s = 10 * g.step
    op = left_translation(g, s)
    phi = np.exp(-((g.log_t) ** 2) / 0.32)  # supported well inside
    out = op.matrix @ phi
    n_in = math.sqrt(np.sum(g.w_add * phi**2))
    n_out = math.sqrt(np.sum(g.w_add * out**2))
    assert n_out == pytest.approx(n_in, rel=1e-10)


def test_translation_group_law(small_grid_r):
    g = small_grid_r
    s = 7 * g.step
    lf = left_translation(g, s)
    lb = left_translation(g, -s)
    phi = np.exp(-(g.log_t**2) / 0.32)  # dead at the grid edges
    assert np.allclose((lb.matrix @ (lf.matrix @ phi)), phi, atol=1e-13)


def test_translation_singular_values_interior(small_grid_r):
    # interior block: every singular value is 0 (truncated band) or exactly 1
    g = small_grid_r
    m = 5
    op = left_translation(g, m * g.step)
    b = 10
    block = op.matrix[b : g.n - b, b : g.n - b]
    w = g.w_add[b : g.n - b]
    sym = block * np.sqrt(np.outer(w, 1.0 / w))
    sv = np.linalg.svd(sym, compute_uv=False)
    assert np.all((sv < 1e-12) | (np.abs(sv - 1.0) < 1e-12))
    assert np.sum(sv > 0.5) == len(w) - m


# ----------------------------- u_f -----------------------------------------


def test_uf_two_assemblies_agree(small_grid_r):
    f = TestFunction(width=0.2, support_radius=1.0)
    a = u_f(small_grid_r, f)
    b = u_f_from_translations(small_grid_r, f)
    assert np.abs(a.matrix - b.matrix).max() < 1e-12


def test_uf_approximate_identity(small_grid_r):
    # narrow bump with unit multiplicative mass acts as the identity
    g = small_grid_r
    f = TestFunction(width=0.02, support_radius=0.2)
    mass = f.l1_mult_norm(g.step)
    op = u_f(g, f)
    phi = np.exp(-(g.log_t**2) / 0.5)
    out = op.matrix @ phi / mass
    interior = slice(30, g.n - 30)
    assert np.abs(out[interior] - phi[interior]).max() < 0.05


def test_uf_norm_bound(small_grid_r):
    g = small_grid_r
    f = TestFunction(width=0.25, support_radius=1.2)
    op = u_f(g, f)
    sv = singular_values(op)
    assert sv[0] <= f.l1_mult_norm(g.step) * (1 + 1e-10)


def test_uf_commutes_with_translation_in_interior(small_grid_r):
    g = small_grid_r
    f = TestFunction(width=0.2, support_radius=1.0)
    uf = u_f(g, f).matrix
    lt = left_translation(g, 8 * g.step).matrix
    comm = uf @ lt - lt @ uf
    band = int(1.0 / g.step) + 9
    inner = comm[band:-band, band:-band]
    assert np.linalg.norm(inner) < 1e-10


def test_uf_support_overflow(small_grid_r):
    with pytest.raises(ValueError):
        u_f(small_grid_r, TestFunction(support_radius=10.0))


# ----------------------------- algebra -------------------------------------


def test_compose_identity(small_grid_r):
    rng = np.random.default_rng(0)
    a = random_op(small_grid_r, rng)
    ident = KernelOperator(small_grid_r, np.eye(small_grid_r.n), "additive")
    assert np.allclose(compose(a, ident).matrix, a.matrix)


def test_adjoint_involution(small_grid_r):
    rng = np.random.default_rng(1)
    a = random_op(small_grid_r, rng)
    assert np.allclose(adjoint(adjoint(a)).matrix, a.matrix, atol=1e-12)


def test_adjoint_reverses_products(small_grid_r):
    rng = np.random.default_rng(2)
    a = random_op(small_grid_r, rng)
    b = random_op(small_grid_r, rng)
    lhs = adjoint(compose(a, b)).matrix
    rhs = compose(adjoint(b), adjoint(a)).matrix
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_adjoint_is_weighted_adjoint(small_grid_r):
    # <A phi, psi>_W = <phi, A* psi>_W on random vectors
    rng = np.random.default_rng(3)
    a = random_op(small_grid_r, rng)
    w = small_grid_r.w_add
    phi = rng.standard_normal(small_grid_r.n) + 1j * rng.standard_normal(small_grid_r.n)
    psi = rng.standard_normal(small_grid_r.n) + 1j * rng.standard_normal(small_grid_r.n)
    lhs = np.sum(w * np.conj(a.matrix @ phi) * psi)
    rhs = np.sum(w * np.conj(phi) * (adjoint(a).matrix @ psi))
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_hs_inner_positive_definite(small_grid_r):
    rng = np.random.default_rng(4)
    a = random_op(small_grid_r, rng)
    val = hs_inner(a, a)
    assert val.real > 0
    assert abs(val.imag) < 1e-9 * val.real
    zero = KernelOperator(small_grid_r, np.zeros((small_grid_r.n, small_grid_r.n)), "additive")
    assert hs_inner(zero, zero) == 0.0


def test_hs_inner_equals_trace_of_adjoint_product(backend_small20):
    grid = backend_small20
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = random_op(grid, rng)
        b = random_op(grid, rng)
        lhs = hs_inner(a, b)
        rhs = trace(compose(adjoint(a), b))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_trace_cyclicity(small_grid_r):
    rng = np.random.default_rng(6)
    a = random_op(small_grid_r, rng)
    b = random_op(small_grid_r, rng)
    t1 = trace(compose(a, b))
    t2 = trace(compose(b, a))
    assert abs(t1 - t2) < 1e-10 * abs(t1)


def test_trace_of_discrete_identity_is_n(small_grid_r):
    # documented discretization caveat: the identity matrix is not a smooth
    # kernel; its trace is the grid size, not a continuum quantity
    ident = KernelOperator(small_grid_r, np.eye(small_grid_r.n), "additive")
    assert trace(ident) == pytest.approx(small_grid_r.n)


def test_trace_rank_one(small_grid_r):
    g = small_grid_r
    rng = np.random.default_rng(7)
    phi = rng.standard_normal(g.n)
    psi = rng.standard_normal(g.n)
    # kernel k(x, y) = phi(x) conj(psi(y)); operator matrix = kernel * w[col]
    mat = np.outer(phi, np.conj(psi)) * g.w_add[None, :]
    op = KernelOperator(g, mat, "additive")
    inner = np.sum(g.w_add * np.conj(psi) * phi)
    assert trace(op) == pytest.approx(inner, rel=1e-12)


def test_hs_inner_with_identity_kernel_is_not_trace(small_grid_r):
    # negative control: the identity is not Hilbert-Schmidt in the continuum
    rng = np.random.default_rng(8)
    a = random_op(small_grid_r, rng)
    ident = KernelOperator(small_grid_r, np.eye(small_grid_r.n), "additive")
    assert abs(hs_inner(a, ident) - trace(a)) > 1e-6 * abs(trace(a))


def test_grid_mismatch_raises(small_grid_r, backend_r):
    from loctrace import make_grid

    other = make_grid(backend_r, 2.0, 64)
    rng = np.random.default_rng(9)
    a = random_op(small_grid_r, rng)
    b = random_op(other, rng)
    with pytest.raises(ValueError):
        compose(a, b)


def test_projection_singular_values(small_grid_r):
    p = cutoff_projection(small_grid_r, 3.0)
    sv = singular_values(p)
    count = int(np.sum(small_grid_r.t <= 3.0))
    assert np.sum(sv > 0.5) == count
    assert np.allclose(sv[:count], 1.0, atol=1e-12)


# ----------------------------- test function --------------------------------


def test_testfunction_value_at_one():
    f = TestFunction(center=0.0, width=0.25, support_radius=1.5)
    assert f.value_at_1 == 1.0
    assert f(1.0) == pytest.approx(1.0)
    fa = TestFunction(center=0.3, width=0.25, support_radius=1.5)
    assert fa.value_at_1 == pytest.approx(math.exp(-0.3**2 / (2 * 0.25**2)))
    assert fa(1.0) == pytest.approx(fa.value_at_1)


def test_testfunction_support():
    f = TestFunction(support_radius=1.5)
    assert f(math.exp(1.5)) == 0.0
    assert f(math.exp(-1.6)) == 0.0
    assert f(math.exp(0.4)) > 0.0


def test_testfunction_smooth_plateau():
    # mollifier equals 1 on the inner half of the support
    f = TestFunction(center=0.0, width=0.25, support_radius=1.5)
    for x in (0.0, 0.3, 0.74):
        assert f(math.exp(x)) == pytest.approx(math.exp(-x**2 / (2 * 0.25**2)), rel=1e-12)


@pytest.fixture(scope="module")
def backend_small20(backend_r):
    from loctrace import make_grid

    return make_grid(backend_r, 1.0, 20)
