import math

import numpy as np
import pytest

from epr_witness.errors import DomainError, UnphysicalStateError
from epr_witness.gaussian_core import (
    C, C_DAG, D, D_DAG,
    ModeMoments,
    QuadratureCovariance,
    RegionLabel,
    TwoModeMoments,
    beam_splitter,
    bose_einstein_pn,
    classify_region,
    covariance_matrix,
    heisenberg_product,
    inverse_beam_splitter,
    is_squeezed,
    normal_order,
    ppt_symplectic_eigenvalues,
    pure_boundary_nbar,
    quadrature_stddevs,
    validate_mode,
    wick_moment,
)

SQRT2 = math.sqrt(2)


def test_validate_mode_vacuum_and_pure_boundary():
    verdict = validate_mode(ModeMoments(0, 0))
    assert verdict.physical
    assert verdict.margin == 0

    verdict = validate_mode(ModeMoments(1, SQRT2))
    assert verdict.physical
    assert abs(verdict.margin) < 1e-12


def test_validate_mode_rejects():
    verdict = validate_mode(ModeMoments(0.1, 1))
    assert not verdict.physical
    assert np.isclose(verdict.margin, math.sqrt(0.11) - 1)

    with pytest.raises(DomainError):
        validate_mode(ModeMoments(-0.1, 0))


def test_quadrature_stddevs():
    assert np.allclose(quadrature_stddevs(ModeMoments(0, 0)), (1 / SQRT2, 1 / SQRT2))

    dx1, dx2 = quadrature_stddevs(ModeMoments(1, SQRT2))
    assert np.isclose(dx1, 0.29290, atol=1e-5)
    assert np.isclose(dx2, 1.70711, atol=1e-5)
    assert np.isclose(dx1 * dx2, 0.5, atol=1e-12)


def test_quadrature_stddevs_unphysical():
    with pytest.raises(UnphysicalStateError):
        quadrature_stddevs(ModeMoments(0.1, 1))


def test_heisenberg_product():
    assert np.isclose(heisenberg_product(ModeMoments(0, 0)), 0.5)
    assert np.isclose(heisenberg_product(ModeMoments(1, 0)), 1.5)
    assert np.isclose(heisenberg_product(ModeMoments(1, SQRT2)), 0.5, atol=1e-12)


@pytest.mark.parametrize("nbar,m", [(0.3, 0.1), (1.0, -0.7), (2.0, 2.4), (0.5, 0.8)])
def test_stddev_product_matches_heisenberg(nbar, m):
    mode = ModeMoments(nbar, m)
    dx1, dx2 = quadrature_stddevs(mode)
    assert abs(dx1 * dx2 - heisenberg_product(mode)) < 1e-12


def test_pure_boundary_heisenberg_minimum():
    for nbar in np.linspace(0.1, 3, 12):
        m = math.sqrt(nbar * (nbar + 1))
        assert abs(heisenberg_product(ModeMoments(nbar, m)) - 0.5) < 1e-12


def test_is_squeezed():
    assert is_squeezed(ModeMoments(1, SQRT2))
    assert not is_squeezed(ModeMoments(1, 0.5))
    assert not is_squeezed(ModeMoments(0, 0))


def test_beam_splitter_epr():
    tm = beam_splitter(ModeMoments(0.5, 0.8), ModeMoments(0.5, -0.8))
    assert tm.nbar_c == tm.nbar_d == 0.5
    assert np.isclose(tm.corr_cd, -0.8)
    assert tm.coh_cd == 0
    assert tm.sq_c == 0 and tm.sq_d == 0
    assert tm == TwoModeMoments.epr(0.5, 0.8)


def test_beam_splitter_vacuum_and_nopa():
    vac = beam_splitter(ModeMoments(0, 0), ModeMoments(0, 0))
    assert vac == TwoModeMoments.vacuum()

    tm = beam_splitter(ModeMoments(1, SQRT2), ModeMoments(1, -SQRT2))
    assert np.isclose(tm.corr_cd, -SQRT2)
    assert tm.coh_cd == 0


def test_beam_splitter_rejects_unphysical():
    with pytest.raises(UnphysicalStateError):
        beam_splitter(ModeMoments(0.1, 1), ModeMoments(0, 0))


@pytest.mark.parametrize("a,b", [
    ((0.5, 0.8), (0.5, -0.8)),
    ((0.2, 0.1), (1.3, -0.9)),
    ((2.0, 0.0), (0.0, 0.0)),
])
def test_beam_splitter_involution_and_photon_number(a, b):
    mode_a, mode_b = ModeMoments(*a), ModeMoments(*b)
    tm = beam_splitter(mode_a, mode_b)
    assert tm.nbar_c + tm.nbar_d == pytest.approx(mode_a.nbar + mode_b.nbar, abs=1e-15)

    back_a, back_b = inverse_beam_splitter(tm)
    assert abs(back_a.nbar - mode_a.nbar) < 1e-12
    assert abs(back_a.m - mode_a.m) < 1e-12
    assert abs(back_b.nbar - mode_b.nbar) < 1e-12
    assert abs(back_b.m - mode_b.m) < 1e-12


def test_classify_region_known_points():
    assert classify_region((-1 + math.sqrt(5)) / 2, 1) == RegionLabel.PURE_BOUNDARY
    assert classify_region(2, 1) == RegionLabel.SEPARABLE
    assert classify_region(0.5, 0.8) == RegionLabel.ENTANGLED
    assert classify_region(0.1, 1) == RegionLabel.UNPHYSICAL
    assert classify_region(1, 1) == RegionLabel.SEPARABLE_BOUNDARY
    assert classify_region(0, 0) == RegionLabel.PURE_BOUNDARY


def test_classify_region_rejects_nan():
    with pytest.raises(DomainError):
        classify_region(float("nan"), 0.5)


def test_pure_boundary_identity():
    for m in np.linspace(0, 5, 51):
        nbar = pure_boundary_nbar(m)
        assert np.isclose(nbar, (-1 + math.sqrt(1 + 4 * m * m)) / 2, atol=1e-12)
        assert abs(m * m - nbar * (nbar + 1)) < 1e-12 * max(1.0, m * m)


def test_bose_einstein_pn():
    assert bose_einstein_pn(1, 0) == 0.5
    assert bose_einstein_pn(1, 1) == 0.25
    assert np.isclose(sum(bose_einstein_pn(2.0, n) for n in range(200)), 1.0)
    assert bose_einstein_pn(0, 0) == 1.0
    assert bose_einstein_pn(0, 3) == 0.0
    with pytest.raises(DomainError):
        bose_einstein_pn(-1, 0)


def test_covariance_matrix_vacuum():
    cov = covariance_matrix(TwoModeMoments.vacuum())
    assert np.allclose(cov.sigma, 0.5 * np.eye(4))
    assert cov.is_physical()


def test_covariance_matrix_epr_correlations():
    cov = covariance_matrix(TwoModeMoments.epr(0.5, 0.8))
    assert np.isclose(cov.sigma[0, 2], -0.8)  # <X_c X_d>
    assert np.isclose(cov.sigma[1, 3], 0.8)  # <P_c P_d>
    assert np.isclose(cov.sigma[0, 0], 1.0)
    assert cov.is_physical()


def test_covariance_matrix_unphysical_detected():
    # m 가 물리 한계를 넘으면 σ + iΩ/2 가 음의 고유값을 가짐
    cov = covariance_matrix(TwoModeMoments.epr(0.1, 1.0))
    assert not cov.is_physical()
    with pytest.raises(UnphysicalStateError):
        TwoModeMoments.epr(0.1, 1.0).validate()


def test_ppt_symplectic_eigenvalues():
    pair = ppt_symplectic_eigenvalues(covariance_matrix(TwoModeMoments.epr(0.5, 0.8)))
    assert np.isclose(pair.nu_minus, 0.2)
    assert pair.entangled

    pair = ppt_symplectic_eigenvalues(covariance_matrix(TwoModeMoments.epr(1.0, 1.0)))
    assert np.isclose(pair.nu_minus, 0.5)
    assert not pair.entangled

    pair = ppt_symplectic_eigenvalues(covariance_matrix(TwoModeMoments.vacuum()))
    assert np.isclose(pair.nu_minus, 0.5)
    assert not pair.entangled


def test_ppt_rejects_non_positive():
    with pytest.raises(DomainError):
        ppt_symplectic_eigenvalues(QuadratureCovariance(-np.eye(4)))
    with pytest.raises(DomainError):
        ppt_symplectic_eigenvalues(QuadratureCovariance(np.eye(3)))


def test_region_agrees_with_ppt_on_grid():
    for nbar in np.linspace(0.05, 3, 40):
        for m in np.linspace(0, 3, 40):
            region = classify_region(nbar, m)
            if region != RegionLabel.ENTANGLED and region != RegionLabel.SEPARABLE:
                continue
            pair = ppt_symplectic_eigenvalues(covariance_matrix(TwoModeMoments.epr(nbar, m)))
            assert pair.entangled == (region == RegionLabel.ENTANGLED), (nbar, m)


def test_wick_epr_moments():
    tm = TwoModeMoments.epr(0.5, 0.8)
    assert np.isclose(wick_moment(tm, (C_DAG, C)), 0.5)
    assert np.isclose(wick_moment(tm, (C, C_DAG)), 1.5)
    assert np.isclose(wick_moment(tm, (C, D)), -0.8)
    assert wick_moment(tm, (C,)) == 0
    # <c†d†cd> = n̄² + m²
    assert np.isclose(wick_moment(tm, (C_DAG, D_DAG, C, D)), 0.25 + 0.64)
    # <c†²c²> = 2n̄²
    assert np.isclose(wick_moment(tm, (C_DAG, C_DAG, C, C)), 0.5)


def test_normal_order_moves_creators_left():
    assert normal_order((C, D_DAG, D, C_DAG)) == (D_DAG, C_DAG, C, D)
