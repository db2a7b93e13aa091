import numpy as np
import pytest

from rangecorr import _paths_py, kernels

BACKENDS = kernels.available_backends()
needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled kernel not built")


def test_splitmix_reference_values():
    # SplitMix64 outputs for seed 0: state advances by golden, output = finalizer(state)
    gold = 0x9E3779B97F4A7C15
    expected = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    got = [int(_paths_py.mix64(np.uint64((k + 1) * gold % 2**64))) for k in range(3)]
    assert got == expected


def test_uniforms_in_open_interval_and_uniform():
    u = _paths_py.uniform(np.uint64(12345), np.arange(400_000, dtype=np.uint64))
    assert u.min() > 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)
    hist, _ = np.histogram(u, bins=20, range=(0, 1))
    chi2 = ((hist - u.size / 20) ** 2 / (u.size / 20)).sum()
    assert chi2 < 45  # 19 dof, p ~ 1e-3


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("process", [kernels.PROCESS_BM, kernels.PROCESS_VG])
def test_partition_independence(backend, process):
    full = kernels.simulate_extremes(77, 0, 2500, 40, process, 0.3, 0.0, 0.5, workers=1, backend=backend)
    parts = np.vstack([
        kernels.simulate_extremes(77, s, n, 40, process, 0.3, 0.0, 0.5, workers=3, backend=backend)
        for s, n in ((0, 1), (1, 1500), (1501, 999))
    ])
    assert np.array_equal(full, parts)


@needs_compiled
@pytest.mark.parametrize("process,drift", [(kernels.PROCESS_BM, 0.0), (kernels.PROCESS_BM, 0.1), (kernels.PROCESS_VG, 0.0)])
def test_backends_agree(process, drift):
    args = (2024, 10, 3000, 200, process, -0.45, drift, 0.5)
    a = kernels.simulate_extremes(*args, backend="compiled")
    b = kernels.simulate_extremes(*args, backend="python")
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_extreme_ordering(backend):
    out = kernels.simulate_extremes(5, 0, 2000, 30, kernels.PROCESS_VG, 0.8, workers=1, backend=backend)
    h1, l1, s1, h2, l2, s2 = out.T
    assert np.all(l1 <= 0) and np.all(h1 >= 0) and np.all((l1 <= s1) & (s1 <= h1))
    assert np.all(l2 <= 0) and np.all(h2 >= 0) and np.all((l2 <= s2) & (s2 <= h2))


def test_env_forces_python(monkeypatch):
    monkeypatch.setenv("RANGECORR_PURE_PYTHON", "1")
    assert kernels.get_backend() is _paths_py
    assert kernels.backend_name() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
