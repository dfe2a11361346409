import pytest

from zcovers import examples as ex
from zcovers.cover import classify_cylinder_lift, strips_exist_certificate
from zcovers.cylinders import cylinder_decomposition, periodic_directions
from zcovers.numfield import QQ, Vec
from zcovers.surface import cone_angles, holonomy

# genus and cone angles (in multiples of pi) checked against the corner-angle oracle
# in test_surface; frozen here per example
SHAPES = {
    "torus": (1, [2]),
    "staircase": (1, [2, 2]),
    "double_octagon_hw": (3, [6, 6]),
    "double_ngon_8": (3, [6, 6]),
    "double_ngon_10": (4, [8, 8]),
    "wollmilchsau": (3, [4, 4, 4, 4]),
}


@pytest.fixture(scope="module", params=list(ex.BUILDERS))
def bundle(request):
    return ex.get(request.param)


def test_shape(bundle):
    g, angles = SHAPES[bundle.name]
    assert bundle.surface.genus == g
    cones = sorted(a for _, a in cone_angles(bundle.surface) if a != 2)
    assert cones == sorted(a for a in angles if a != 2)


def test_cycles_have_zero_holonomy_except_torus(bundle):
    for name, w in bundle.cycles.items():
        h = holonomy(bundle.surface, w)
        if bundle.name == "torus":
            assert h != Vec(QQ(0), QQ(0))
        else:
            assert h.x == 0 and h.y == 0, name


def test_declared_strip_directions(bundle):
    for cname, d in bundle.strip_directions:
        cov = bundle.cover(cname)
        dec = cylinder_decomposition(bundle.surface, d, 20)
        assert dec
        assert any(classify_cylinder_lift(cov, c).is_strip for c in dec.cylinders)


def test_generators_preserve_cylinder_moduli(bundle):
    # an area-preserving affine automorphism maps cylinders to cylinders of equal area,
    # scaling all moduli of one decomposition by the same factor
    dirs = [d for d, _ in periodic_directions(bundle.surface, 6)][:4]
    for g in bundle.veech_generators:
        assert g.a * g.d - g.b * g.c == 1
        for d in dirs:
            dec = cylinder_decomposition(bundle.surface, d.v, 30)
            img = cylinder_decomposition(bundle.surface, g.act(d.v), 60)
            assert dec and img
            assert sorted(c.area for c in dec.cylinders) == sorted(c.area for c in img.cylinders)
            m0 = sorted(c.modulus for c in dec.cylinders)
            m1 = sorted(c.modulus for c in img.cylinders)
            assert [m / m0[0] for m in m0] == [m / m1[0] for m in m1]


def test_wollmilchsau_has_no_strip():
    b = ex.wollmilchsau()
    rep = strips_exist_certificate(b.cover(), periodic_directions(b.surface, 10), 10)
    assert not rep.witnesses
    assert rep.directions_periodic > 0
    assert rep.span_index is None
    assert not rep.conclusive


def test_unknown_and_unsupported():
    with pytest.raises(KeyError):
        ex.get("nope")
    with pytest.raises(ex.UnsupportedN):
        ex.double_ngon(12)
