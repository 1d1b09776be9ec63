import math

import numpy as np
import pytest

from dppkit import (BesselKernel, ExistenceError, FourierProjectionKernel,
                    GaussianKernel, GinibreKernel, InhomGaussianKernel,
                    UndefinedPcfError, check_existence, eval_kernel,
                    pair_correlation, require_existence)

J1_AT_1 = 0.44005058574493355  # Bessel J_1(1), series value


def _all_kernels():
    return [
        FourierProjectionKernel([[-1], [0], [1]]),
        GinibreKernel(rho=2.0, beta=0.1),
        GaussianKernel(rho=3.0, alpha=0.2, dim=2),
        InhomGaussianKernel(rho=1.0, alpha=0.5, sigma=1.0, dim=2),
        BesselKernel(rho=2.0, alpha=0.2, dim=2),
    ]


def test_fourier_projection_dirichlet_values():
    # sum_{j=-1..1} e^{2 i pi j t} = 1 + 2 cos(2 pi t)
    k = FourierProjectionKernel([[-1], [0], [1]])
    assert eval_kernel(k, [0.3], [0.3]) == pytest.approx(3.0)
    assert eval_kernel(k, [0.25], [0.0]) == pytest.approx(1.0, abs=1e-12)
    assert eval_kernel(k, [1 / 3], [0.0]) == pytest.approx(0.0, abs=1e-12)
    assert k.diag([[0.1], [0.9]]).tolist() == [3.0, 3.0]


def test_fourier_projection_rejects_duplicates():
    with pytest.raises(ValueError):
        FourierProjectionKernel([[0, 0], [1, 1], [0, 0]])


def test_projection_matrix_is_psd():
    k = FourierProjectionKernel([[j1, j2] for j1 in (-1, 0, 1) for j2 in (-1, 0, 1)])
    rng = np.random.default_rng(0)
    X = rng.random((12, 2))
    M = k.matrix(X, X)
    assert np.allclose(M, M.conj().T)
    assert np.linalg.eigvalsh(M).min() > -1e-10


def test_hermiticity_random_probes():
    rng = np.random.default_rng(1)
    for k in _all_kernels():
        X = rng.standard_normal((5, k.dim)) * 0.3
        Y = rng.standard_normal((4, k.dim)) * 0.3
        assert np.allclose(k.matrix(X, Y), k.matrix(Y, X).conj().T, atol=1e-12)


def test_ginibre_kernel_modulus():
    # |K(x,y)|^2 = rho^2 exp(-|x-y|^2/beta)
    k = GinibreKernel(rho=2.0, beta=0.15)
    x, y = np.array([0.1, -0.2]), np.array([0.3, 0.25])
    d2 = float(((x - y) ** 2).sum())
    assert abs(eval_kernel(k, x, y)) ** 2 == pytest.approx(4.0 * math.exp(-d2 / 0.15), rel=1e-12)
    # pcf 1 - exp(-r^2/beta)
    g = pair_correlation(k, x, y)
    assert g == pytest.approx(1.0 - math.exp(-d2 / 0.15), rel=1e-12)


def test_gaussian_kernel_and_pcf():
    k = GaussianKernel(rho=5.0, alpha=0.3, dim=2)
    x, y = np.array([0.0, 0.0]), np.array([0.2, 0.1])
    d2 = 0.05
    assert eval_kernel(k, x, y).real == pytest.approx(5.0 * math.exp(-d2 / 0.09), rel=1e-12)
    assert pair_correlation(k, x, y) == pytest.approx(1.0 - math.exp(-2 * d2 / 0.09), rel=1e-12)


def test_bessel_kernel_profile():
    k = BesselKernel(rho=2.0, alpha=1.0, dim=2)
    # d=2 profile J_1(2s)/s at s = 1/2 -> 2 J_1(1)
    v = eval_kernel(k, [0.0, 0.0], [0.5, 0.0]).real
    assert v == pytest.approx(2.0 * 2.0 * J1_AT_1, rel=1e-12)
    assert eval_kernel(k, [0.1, 0.1], [0.1, 0.1]).real == pytest.approx(2.0)


def test_pcf_bounds_and_zero_at_coincidence():
    rng = np.random.default_rng(2)
    for k in _all_kernels():
        x = rng.standard_normal(k.dim) * 0.2
        y = rng.standard_normal(k.dim) * 0.2
        g = pair_correlation(k, x, y)
        assert g <= 1.0 + 1e-12
        assert pair_correlation(k, x, x) == pytest.approx(0.0, abs=1e-12)


def test_pcf_undefined_where_intensity_vanishes():
    k = InhomGaussianKernel(rho=1.0, alpha=0.5, sigma=1.0, dim=2)
    with pytest.raises(UndefinedPcfError):
        pair_correlation(k, [60.0, 0.0], [0.0, 0.0])


def test_existence_boundaries():
    rho = 40.0
    # Ginibre: rho beta pi <= 1
    assert check_existence(GinibreKernel(rho, 1 / (rho * math.pi))).exists
    assert not check_existence(GinibreKernel(rho, 1.02 / (rho * math.pi))).exists
    # Gaussian d=2: rho alpha^2 pi <= 1
    a_max = 1.0 / math.sqrt(rho * math.pi)
    assert check_existence(GaussianKernel(rho, a_max)).exists
    assert not check_existence(GaussianKernel(rho, 1.01 * a_max)).exists
    # Bessel d=2 shares the Gaussian boundary (Gamma(2) = 1)
    assert check_existence(BesselKernel(rho, a_max)).exists
    assert not check_existence(BesselKernel(rho, 1.01 * a_max)).exists
    # projection kernels always exist
    assert check_existence(FourierProjectionKernel([[0]])).exists


def test_inhom_gaussian_existence_rule():
    # 2 rho^(1/d) <= 1 + sqrt(1 + 8 sigma^2 / alpha^2)
    k = InhomGaussianKernel(rho=1.0, alpha=1.0, sigma=1.0, dim=2)
    rep = check_existence(k)
    assert rep.exists and rep.value == pytest.approx(2.0) and rep.bound == pytest.approx(4.0)
    big = InhomGaussianKernel(rho=1e4, alpha=1.0, sigma=0.1, dim=2)
    assert not check_existence(big).exists


def test_require_existence_raises():
    bad = GaussianKernel(rho=100.0, alpha=1.0, dim=2)
    with pytest.raises(ExistenceError):
        require_existence(bad)
    rep = require_existence(GaussianKernel(rho=1.0, alpha=0.1, dim=2))
    assert rep.exists


def test_eval_kernel_validates_shapes():
    k = GaussianKernel(rho=1.0, alpha=1.0, dim=2)
    with pytest.raises(ValueError):
        eval_kernel(k, [0.0, 0.0], [0.0])
    with pytest.raises(ValueError):
        eval_kernel(k, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])


def test_parameter_validation():
    for bad in (lambda: GinibreKernel(0.0, 1.0), lambda: GaussianKernel(1.0, -1.0),
                lambda: BesselKernel(-2.0, 1.0), lambda: InhomGaussianKernel(1.0, 1.0, 0.0)):
        with pytest.raises(ValueError):
            bad()


def test_inhom_gaussian_intensity_profile():
    k = InhomGaussianKernel(rho=10.0, alpha=0.2, sigma=2.0, dim=2)
    x = np.array([[0.0, 0.0], [1.0, 1.0]])
    want = 10.0 * np.exp(-(x ** 2).sum(axis=1) / 8.0) / (2.0 * math.sqrt(2 * math.pi)) ** 2
    assert np.allclose(k.diag(x), want, rtol=1e-12)
