import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from xyineq.errors import ModelError
from xyineq.model import (CouplingTable, ModelSpec, SiteSet, Term, box_edges, box_sites, kitaev_couplings,
                          kitaev_sites, load_model, mask_of, model_from_dict, model_to_dict,
                          nearest_neighbour_couplings, nonempty_subsets, popcount, save_model, sites_of)


def test_mask_helpers():
    assert mask_of([0, 2, 5]) == 0b100101
    assert sites_of(0b100101) == (0, 2, 5)
    assert popcount(0b1011) == 3
    assert list(nonempty_subsets(2)) == [1, 2, 3]


@given(st.sets(st.integers(0, 63), max_size=10))
def test_mask_roundtrip(sites):
    assert sites_of(mask_of(sites)) == tuple(sorted(sites))


def test_nearest_neighbour_single_edge():
    table = nearest_neighbour_couplings((2,))
    assert list(table) == [Term(0b11, 1.0, 1.0)]


def test_nearest_neighbour_square_and_ring():
    assert len(nearest_neighbour_couplings((2, 2))) == 4
    ring = box_edges((3,), periodic=True)
    assert ring == [(0, 1), (0, 2), (1, 2)]


def test_box_sites_geometry():
    s = box_sites((2, 3))
    assert (s.n, s.geometry, s.dims) == (6, "square", (2, 3))
    with pytest.raises(ModelError):
        box_sites((9, 9))


def test_kitaev_1x1():
    table = kitaev_couplings(1, 1)
    assert kitaev_sites(1, 1).n == 4
    vertex = [t for t in table if t.j1]
    face = [t for t in table if t.j2]
    assert len(vertex) == 4 and len(face) == 1
    assert face[0].mask == 0b1111
    assert table.ferromagnetic and table.convention == "1-3"


def test_kitaev_2x1_faces():
    table = kitaev_couplings(2, 1)
    faces = [t for t in table if t.j2]
    assert len(faces) == 2 and all(popcount(t.mask) == 4 for t in faces)
    assert kitaev_sites(2, 1).n == 7


def test_kitaev_rejects_wrong_lengths():
    with pytest.raises(ModelError, match="jx"):
        kitaev_couplings(1, 1, [1.0, 2.0])


def test_table_validation():
    with pytest.raises(ModelError, match="empty"):
        CouplingTable((Term(0, 1, 1),))
    with pytest.raises(ModelError, match="duplicate"):
        CouplingTable((Term(3, 1, 1), Term(3, 2, 2)))
    with pytest.raises(ModelError):
        CouplingTable(model="potts")


def test_table_edit_helpers():
    t = CouplingTable.from_mapping({(0, 1): (1.0, 0.5), 4: 2.0})
    assert t.get(0b11) == (1.0, 0.5) and t.get(4) == (2.0, 0.0) and t.get(8) == (0.0, 0.0)
    assert t.shifted(0b11, 0.5, -0.5).get(0b11) == (1.5, 0.0)
    assert t.shifted(8, 1.0).get(8) == (1.0, 0.0)
    assert t.scaled(2).get(4) == (4.0, 0.0)
    assert t.support == 0b111
    assert not t.shifted(4, -3).ferromagnetic


def test_spec_validation():
    table = CouplingTable.from_mapping({(0, 3): 1.0})
    with pytest.raises(ModelError, match="couplings"):
        ModelSpec(SiteSet(2), table)
    with pytest.raises(ModelError, match="beta"):
        ModelSpec(SiteSet(4), table, beta=0.0)
    with pytest.raises(ModelError, match="spin"):
        ModelSpec(SiteSet(4), table, spin=Fraction(1, 3))
    assert ModelSpec(SiteSet(4), table, spin="3/2").spin == Fraction(3, 2)


def test_minimal_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"sites": 1, "couplings": [{"subset": [0], "j1": 1}]}))
    spec = load_model(path)
    assert spec.n == 1 and spec.model == "quantum-xy" and spec.beta == 1.0


@pytest.mark.parametrize("data, where", [
    ({"sites": 2, "couplings": [{"subset": [], "j1": 1}]}, "couplings[0].subset"),
    ({"sites": 2, "couplings": [{"subset": [1, 0], "j1": 1}]}, "couplings[0].subset"),
    ({"sites": 2, "couplings": [{"subset": [0, 2], "j1": 1}]}, "couplings[0].subset"),
    ({"sites": 2, "couplings": [{"subset": [0], "j1": "x"}]}, "couplings[0].j1"),
    ({"sites": 2, "couplings": [{"subset": [0]}, {"subset": [0]}]}, "couplings[1].subset"),
    ({"sites": "2"}, "sites"),
    ({"sites": 2, "beta": -1}, "beta"),
    ({"sites": 2, "spin": "1/3"}, "spin"),
])
def test_invalid_files_report_field_paths(data, where):
    with pytest.raises(ModelError) as info:
        model_from_dict(data)
    assert info.value.path == where


def test_unknown_fields_and_bad_json(tmp_path):
    with pytest.raises(ModelError, match="unknown"):
        model_from_dict({"sites": 1, "colour": "red"})
    path = tmp_path / "bad.json"
    path.write_text("{\"sites\": 1,")
    with pytest.raises(ModelError, match="line 1"):
        load_model(path)


def test_ising_file_uses_j():
    spec = model_from_dict({"sites": 2, "model": "ising", "couplings": [{"subset": [0, 1], "j": 0.7}]})
    assert spec.couplings.get(0b11) == (0.7, 0.0)


_coupling = st.floats(-3, 3, allow_nan=False)


@st.composite
def specs(draw):
    n = draw(st.integers(1, 5))
    masks = draw(st.sets(st.integers(1, (1 << n) - 1), max_size=6))
    terms = tuple(Term(m, draw(_coupling), draw(_coupling)) for m in masks)
    model = draw(st.sampled_from(["classical-xy", "quantum-xy"]))
    convention = draw(st.sampled_from(["1-2", "1-3"]))
    beta = draw(st.floats(0.01, 5))
    spin = draw(st.sampled_from(["1/2", "1", "3/2"]))
    return ModelSpec(SiteSet(n), CouplingTable(terms, model, convention), beta, spin)


@given(specs())
def test_dict_roundtrip(spec):
    assert model_from_dict(json.loads(json.dumps(model_to_dict(spec)))) == spec


def test_save_load_identity(tmp_path):
    spec = ModelSpec(box_sites((2, 2)), nearest_neighbour_couplings((2, 2), 1.0, 0.25), 0.7, "1")
    save_model(spec, tmp_path / "m.json")
    assert load_model(tmp_path / "m.json") == spec
