import pytest

from logdiff import kernels

BACKENDS = {"python": kernels.pure}
if kernels.compiled is not None:
    BACKENDS["cython"] = kernels.compiled


@pytest.fixture(params=["python", "cython"])
def backend(request, monkeypatch):
    """Run the test once per radial-kernel backend (compiled one skipped if not built)."""
    if request.param not in BACKENDS:
        pytest.skip("compiled kernel not built")
    mod = BACKENDS[request.param]
    monkeypatch.setattr(kernels, "radial_newton", mod.radial_newton)
    monkeypatch.setattr(kernels, "tridiagonal_solve", mod.tridiagonal_solve)
    return request.param
