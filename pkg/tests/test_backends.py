"""Cross-checks between the compiled kernels and the numpy twin."""

import numpy as np
import pytest

import rotenberg as rt
import rotenberg._kernels_py as pyk

spd = pytest.importorskip("rotenberg._speedups")

from conftest import make_model


@pytest.fixture(scope="module")
def workload(request):
    model = make_model(1.0, 2.0, 0.7, 0.3, n_v=80)
    rng = np.random.default_rng(17)
    f = rt.random_box_density(model.space, 160, rng)
    ext = rt.build_extension(model, f, t_max=1.5)
    omega = np.ascontiguousarray(f.values.T)
    return model, f, ext, omega, rng


def test_small_t_apply_agrees(workload):
    model, f, _, omega, _ = workload
    args = (omega, f.dx, 0.3, model.space.nodes, model.space.weights,
            model.kmat, 0.7, 0.3)
    np.testing.assert_allclose(pyk.small_t_apply(*args), spd.small_t_apply(*args),
                               atol=1e-12)


def test_dual_small_step_agrees(workload):
    model, f, _, omega, _ = workload
    args = (omega, f.dx, 0.45, model.space.nodes, model.space.weights,
            model.kmat, 0.7, 0.3)
    np.testing.assert_allclose(pyk.dual_small_step(*args), spd.dual_small_step(*args),
                               atol=1e-12)


def test_transport_apply_agrees(workload):
    model, f, ext, omega, _ = workload
    e = np.asarray(ext._ext_vm)
    a = pyk.transport_apply(omega, e, f.dx, 1.3, model.space.nodes)
    b = spd.transport_apply(omega, e, f.dx, 1.3, model.space.nodes)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_eval_blocks_agrees_including_frontier(workload):
    model, f, ext, omega, rng = workload
    e = np.asarray(ext._ext_vm)
    y = rng.uniform(ext.x_min, 0.999, size=20_000)
    cols = rng.integers(0, model.space.n, size=20_000)
    a = pyk.eval_blocks(omega, e, f.dx, y, cols)
    b = spd.eval_blocks(omega, e, f.dx, y, cols)
    mask = np.isfinite(a) | np.isfinite(b)
    np.testing.assert_allclose(a[mask], b[mask], atol=1e-12)


def test_full_extension_sweep_agrees(workload, monkeypatch):
    model, f, ext, _, _ = workload
    import rotenberg.backend as bk
    import rotenberg.extension as extmod
    monkeypatch.setattr(bk, "_impl", pyk)
    ext_py = extmod.build_extension(model, f, t_max=1.5)
    a, b = np.asarray(ext._ext_vm), np.asarray(ext_py._ext_vm)
    mask = np.isfinite(a)
    assert np.array_equal(mask, np.isfinite(b))
    np.testing.assert_allclose(a[mask], b[mask], atol=1e-12)


def test_threads_env_does_not_change_results(workload, monkeypatch):
    model, f, _, omega, _ = workload
    args = (omega, f.dx, 0.25, model.space.nodes, model.space.weights,
            model.kmat, 0.7, 0.3)
    one = spd.small_t_apply(*args, num_threads=1)
    two = spd.small_t_apply(*args, num_threads=2)
    np.testing.assert_array_equal(one, two)
