import pytest

from gradunify.avm import (
    EMPTY,
    Atom,
    AvmError,
    FeatureStructure,
    all_paths,
    atomic_paths,
    category,
    fs_equal,
    get_path,
    make_atom,
    shape_key,
)
from gradunify.grammar_io import parse_avm

from oracles import expand_paths, random_fs, seeded, with_sharing


def sg():
    return make_atom([("sg", 1.0)])


class TestMakeAtom:
    def test_single(self):
        assert dict(make_atom([("sg", 1.0)])) == {"sg": 1.0}

    def test_normalizes(self):
        a = make_atom([("sg", 3.0), ("pl", 1.0)])
        assert a["sg"] == pytest.approx(0.75)
        assert a["pl"] == pytest.approx(0.25)

    def test_merges_duplicates(self):
        a = make_atom([("sg", 1.0), ("pl", 1.0), ("sg", 2.0)])
        assert a["sg"] == pytest.approx(0.75)

    def test_accepts_mapping(self):
        assert make_atom({"x": 2, "y": 2})["x"] == pytest.approx(0.5)

    def test_drops_zero_weights(self):
        assert list(make_atom([("sg", 1.0), ("pl", 0.0)])) == ["sg"]

    @pytest.mark.parametrize("pairs", [[("sg", 0.0), ("pl", 0.0)], [], [("sg", -1.0)], [("sg", float("nan"))]])
    def test_rejects(self, pairs):
        with pytest.raises(AvmError):
            make_atom(pairs)

    def test_atom_checks_mass(self):
        with pytest.raises(AvmError):
            Atom({"sg": 0.5})

    def test_top_breaks_ties_by_name(self):
        assert make_atom([("b", 1), ("a", 1)]).top() == "a"
        assert make_atom([("b", 2), ("a", 1)]).top() == "b"


class TestFeatureStructure:
    def test_default_priority(self):
        fs = FeatureStructure({"NUM": sg()})
        assert fs.priority("NUM") == 1.0

    def test_complex_feature_has_no_priority(self):
        fs = FeatureStructure({"SUBJ": FeatureStructure({"NUM": sg()})})
        assert fs.priority("SUBJ") is None
        with pytest.raises(AvmError):
            FeatureStructure({"SUBJ": FeatureStructure()}, {"SUBJ": 2.0})

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_priority_must_be_positive(self, bad):
        with pytest.raises(AvmError):
            FeatureStructure({"NUM": sg()}, {"NUM": bad})

    def test_priority_for_missing_feature(self):
        with pytest.raises(AvmError):
            FeatureStructure({"NUM": sg()}, {"PER": 1.0})

    def test_immutable(self):
        fs = FeatureStructure({"NUM": sg()})
        with pytest.raises(TypeError):
            fs["NUM"] = sg()


class TestGetPath:
    def test_examples(self):
        assert dict(get_path(parse_avm("[NUM:{sg}]"), ["NUM"])) == {"sg": 1.0}
        assert dict(get_path(parse_avm("[SUBJ:[NUM:{sg}]]"), ["SUBJ", "NUM"])) == {"sg": 1.0}
        assert get_path(parse_avm("[NUM:{sg}]"), ["PER"]) is None

    def test_through_atom_is_absent(self):
        assert get_path(parse_avm("[NUM:{sg}]"), ["NUM", "X"]) is None

    def test_empty_path_is_root(self):
        fs = parse_avm("[NUM:{sg}]")
        assert get_path(fs, ()) is fs

    def test_shared_nodes_resolve_identically(self):
        fs = parse_avm("[SUBJ: #1 [ANIM:{+}] OBJ: #1]")
        assert get_path(fs, ["SUBJ"]) is get_path(fs, ["OBJ"])


class TestAtomicPaths:
    def test_single(self):
        (path, atom, pri), = atomic_paths(parse_avm("[NUM:{sg}!2.0]"))
        assert path == ("NUM",) and dict(atom) == {"sg": 1.0} and pri == 2.0

    def test_sorted(self):
        got = atomic_paths(parse_avm("[SUBJ:[ANIM:{+}!3.0] NUM:{sg}!1.0]"))
        assert [(p, q) for p, _, q in got] == [(("NUM",), 1.0), (("SUBJ", "ANIM"), 3.0)]

    def test_sharing_expanded(self):
        fs = parse_avm("[SUBJ: #1 [ANIM:{+}!1.0] OBJ: #1]")
        got = atomic_paths(fs)
        assert [p for p, _, _ in got] == [("OBJ", "ANIM"), ("SUBJ", "ANIM")]
        ref = sorted((p, dict(a), q) for p, a, q in expand_paths(fs))
        assert [(p, dict(a), q) for p, a, q in got] == ref

    def test_matches_brute_force_walk(self):
        rng = seeded(11)
        for _ in range(200):
            fs = with_sharing(rng, random_fs(rng))
            got = [(p, dict(a), q) for p, a, q in atomic_paths(fs)]
            assert got == sorted((p, dict(a), q) for p, a, q in expand_paths(fs))
            assert atomic_paths(fs) == atomic_paths(fs)

    def test_get_path_agrees(self):
        rng = seeded(12)
        for _ in range(100):
            fs = with_sharing(rng, random_fs(rng))
            for p, atom, _ in atomic_paths(fs):
                assert get_path(fs, p) is atom

    def test_root_atom(self):
        assert atomic_paths(sg()) == [((), sg(), 1.0)]

    def test_all_paths_includes_root(self):
        paths = [p for p, _, _ in all_paths(parse_avm("[A:[B:{x}]]"))]
        assert paths == [(), ("A",), ("A", "B")]


class TestFsEqual:
    def test_same(self):
        assert fs_equal(parse_avm("[NUM:{sg}]"), parse_avm("[NUM:{sg}]"))

    def test_disjunct_order_irrelevant(self):
        assert fs_equal(parse_avm("[NUM:{sg:0.5,pl:0.5}]"), parse_avm("[NUM:{pl:0.5,sg:0.5}]"))

    def test_sharing_matters(self):
        shared = parse_avm("[SUBJ: #1 [ANIM:{+}] OBJ: #1]")
        copied = parse_avm("[SUBJ: [ANIM:{+}] OBJ: [ANIM:{+}]]")
        assert not fs_equal(shared, copied)
        assert shape_key(shared) != shape_key(copied)

    def test_priority_matters(self):
        assert not fs_equal(parse_avm("[NUM:{sg}!2]"), parse_avm("[NUM:{sg}]"))

    def test_weights_within_tolerance(self):
        a = FeatureStructure({"N": Atom({"x": 0.5, "y": 0.5})})
        b = FeatureStructure({"N": Atom({"x": 0.5 + 1e-12, "y": 0.5 - 1e-12})})
        assert fs_equal(a, b)

    def test_empty_leaf_differs_from_absent(self):
        assert not fs_equal(parse_avm("[A:[]]"), EMPTY)

    def test_atom_vs_structure(self):
        assert not fs_equal(sg(), FeatureStructure({"sg": sg()}))

    def test_dunder_eq(self):
        assert parse_avm("[A:{x} B:[C:{y}]]") == parse_avm("[B:[C:{y}] A:{x}]")


def test_category():
    assert category(parse_avm("[CAT:{np} NUM:{sg}]")) == "np"
    assert category(EMPTY) is None
