import math

import numpy as np
import pytest

from graphqft import continuum as ct
from graphqft.errors import UnsupportedShape

EPS = (0.1, 0.05, 0.025, 0.0125)
FAMILIES = (("line", "DD"), ("line", "NN"), ("line", "DN"), ("circle", "closed"))


@pytest.mark.parametrize("shape,bc", FAMILIES)
def test_first_order_probes_fit_unit_slope(shape, bc):
    rows = ct.sweep_continuum(shape, 1.0, 1.0, EPS, bc)
    for q in ct.first_order_quantities(shape, bc):
        slope = ct.convergence_slope(rows, q)
        assert slope == pytest.approx(1.0, abs=0.2), (shape, bc, q, slope)


@pytest.mark.parametrize("shape,bc", FAMILIES)
def test_every_quantity_converges(shape, bc):
    rows = ct.sweep_continuum(shape, 1.0, 1.0, EPS, bc)
    for q in {r.quantity for r in rows}:
        errs = [r.rel_error for r in rows if r.quantity == q]
        assert all(b < a for a, b in zip(errs, errs[1:]))
        assert errs[-1] < 0.05


def test_dd_determinant_target_is_half_zeta():
    # lattice limit sinh(mL)/m; the zeta value is twice that
    rows = ct.sweep_continuum("line", 1.0, 1.0, (0.005,), "DD")
    det = next(r for r in rows if r.quantity == "det")
    assert det.target == pytest.approx(math.sinh(1.0))
    assert det.value == pytest.approx(det.target, rel=0.01)
    zeta = 2 * math.sinh(1.0)
    assert det.value == pytest.approx(zeta / 2, rel=0.01)


def test_circle_determinant_matches_zeta_exactly():
    rows = ct.sweep_continuum("circle", 1.0, 1.0, (0.005,), "closed")
    det = next(r for r in rows if r.quantity == "det")
    assert det.target == pytest.approx(4 * math.sinh(0.5) ** 2)
    assert det.value == pytest.approx(det.target, rel=1e-4)


def test_dn_error_bound_at_small_eps():
    rows = ct.sweep_continuum("line", 1.0, 1.0, (0.01,), "DD")
    for r in rows:
        if r.quantity.startswith("DN"):
            assert r.rel_error < 2 * 0.01


def test_degenerate_spacing_flagged():
    rows = ct.sweep_continuum("line", 1.0, 1.0, (1.0,), "DD")
    assert rows[0].flag == "degenerate"
    assert math.isnan(rows[0].value)


def test_unsupported_shape_rejected():
    with pytest.raises(UnsupportedShape):
        ct.sweep_continuum("torus", 1.0, 1.0, (0.1,))
    with pytest.raises(UnsupportedShape):
        ct.sweep_continuum("line", 1.0, 1.0, (0.1,), bc="closed")


def test_row_serialization():
    rows = ct.sweep_continuum("circle", 1.0, 1.0, (0.1,), "closed")
    d = rows[0].as_dict()
    assert set(d) == {"eps", "quantity", "value", "target", "rel_error", "flag"}
