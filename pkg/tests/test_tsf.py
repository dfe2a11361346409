import pytest

from zcovers import examples as ex
from zcovers.surface import holonomy
from zcovers.tsf import SurfaceFileError, dump_bundle, dumps, load, loads

TORUS = """\
# unit torus
FIELD
QQ
POLYGON
0, 0
1, 0
1, 1
0, 1
GLUE
0.0 <-> 0.2
0.1 <-> 0.3
MARK
0
CYCLE h
0.0 : 1
GENERATOR T
1, 1 ; 0, 1
"""


def test_parse_torus():
    f = loads(TORUS)
    assert f.surface.genus == 1
    assert list(f.cycles) == ["h"]
    assert holonomy(f.surface, f.cycles["h"]).x == 1
    (g,) = f.generators
    assert g.word == ("T",)


@pytest.mark.parametrize("name", list(ex.BUILDERS))
def test_round_trip(name):
    b = ex.get(name)
    text = dump_bundle(b)
    f = loads(text)
    again = dumps(f.surface, f.cycles, f.generators, title=b.name)
    assert again == text
    assert f.surface.genus == ex.get(name).surface.genus


def test_partner_edge_flips_sign():
    text = TORUS.replace("0.0 : 1", "0.2 : 1")
    f = loads(text)
    assert holonomy(f.surface, f.cycles["h"]).x == -1


def test_load_from_path(tmp_path):
    p = tmp_path / "t.tsf"
    p.write_text(TORUS)
    assert load(p).surface.genus == 1


@pytest.mark.parametrize("bad, where", [
    (TORUS.replace("QQ\n", "1 2 ; x y\n"), 3),
    (TORUS.replace("0.0 <-> 0.2", "0.0 - 0.2"), 10),
    (TORUS.replace("0.0 : 1", "0.0 : one"), 15),
    (TORUS.replace("1, 1 ; 0, 1", "1, 1, 0, 1"), 17),
    ("POLYGON\n0, 0\n", 1),
    ("stray\n", 1),
])
def test_errors_carry_line_numbers(bad, where):
    with pytest.raises(SurfaceFileError) as e:
        loads(bad)
    assert e.value.line == where


def test_structural_errors():
    with pytest.raises(SurfaceFileError):
        loads(TORUS.replace("0.1 <-> 0.3\n", ""))
    with pytest.raises(SurfaceFileError):
        loads(TORUS.replace("0.0 : 1", "0.9 : 1"))
    with pytest.raises(SurfaceFileError):
        loads("# nothing\n")
    with pytest.raises(SurfaceFileError):
        loads(TORUS.replace("1, 1 ; 0, 1", "2, 0 ; 0, 1"))
