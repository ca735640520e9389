import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradunify.avm import EMPTY, FeatureStructure, atomic_paths, fs_equal, make_atom
from gradunify.grammar_io import parse_avm
from gradunify.unify import (
    UnificationClash,
    actual_compatibility,
    atom_strength,
    graded_strength,
    perfect_compatibility,
    unify_atoms,
    unify_graded,
    unify_within,
)

from oracles import SYMS, classical_unify, path_formula_strength, random_fs, seeded, with_sharing


def atom(**w):
    return make_atom(list(w.items()))


def average_oracle(a, b):
    # hand-coded union/average, independent of unify_atoms
    out = {}
    for s in set(a) | set(b):
        out[s] = (a.get(s, 0.0) + b.get(s, 0.0)) / 2
    return out


def minsum_oracle(a, b):
    return sum(min(a.get(s, 0.0), b.get(s, 0.0)) for s in set(a) | set(b))


class TestAtoms:
    def test_identical(self):
        assert dict(unify_atoms(atom(sg=1), atom(sg=1))) == {"sg": 1.0}
        assert atom_strength(atom(sg=1), atom(sg=1)) == 1.0

    def test_disjoint(self):
        got = unify_atoms(atom(sg=1), atom(pl=1))
        assert dict(got) == pytest.approx(average_oracle({"sg": 1.0}, {"pl": 1.0}))
        assert atom_strength(atom(sg=1), atom(pl=1)) == 0.0

    def test_partial(self):
        a, b = atom(sg=0.6, pl=0.4), atom(sg=1.0)
        assert dict(unify_atoms(a, b)) == pytest.approx({"sg": 0.8, "pl": 0.2}, abs=1e-9)
        assert atom_strength(a, b) == pytest.approx(0.6, abs=1e-9)

    weights = st.dictionaries(st.sampled_from(SYMS), st.floats(0.01, 1.0), min_size=1, max_size=4)

    @given(weights, weights)
    def test_against_oracles(self, wa, wb):
        a, b = make_atom(wa), make_atom(wb)
        got = unify_atoms(a, b)
        assert sum(got.values()) == pytest.approx(1.0, abs=1e-9)
        assert dict(got) == pytest.approx(average_oracle(dict(a), dict(b)), abs=1e-12)
        s = atom_strength(a, b)
        assert s == pytest.approx(minsum_oracle(dict(a), dict(b)), abs=1e-12)
        assert 0.0 <= s <= 1.0 + 1e-12
        assert s == pytest.approx(atom_strength(b, a), abs=1e-12)

    @given(weights)
    def test_self_strength_is_one(self, w):
        a = make_atom(w)
        assert atom_strength(a, a) == pytest.approx(1.0, abs=1e-9)


class TestCompatibility:
    A = "[NUM:{sg}!2.0 PER:{3}!1.0]"

    @pytest.mark.parametrize(
        "a, b, actual, perfect",
        [
            (A, "[NUM:{pl}!2.0]", 1.0, 3.0),
            ("[NUM:{sg}!1.0]", "[PER:{3}!1.0]", 2.0, 2.0),
            ("[NUM:{sg}!1.0]", "[NUM:{sg}!1.0]", 1.0, 1.0),
        ],
    )
    def test_examples(self, a, b, actual, perfect):
        a, b = parse_avm(a), parse_avm(b)
        assert actual_compatibility(a, b) == pytest.approx(actual)
        assert perfect_compatibility(a, b) == pytest.approx(perfect)

    def test_clash_is_signalled(self):
        with pytest.raises(UnificationClash) as err:
            actual_compatibility(parse_avm("[A:{x}]"), parse_avm("[A:[B:{y}]]"))
        assert err.value.path == ("A",)

    def test_nested_unique_path(self):
        a, b = parse_avm("[SUBJ:[ANIM:{+}!3]]"), parse_avm("[NUM:{sg}]")
        assert actual_compatibility(a, b) == perfect_compatibility(a, b) == 4.0


class TestUnifyGraded:
    def test_mixed_example(self):
        r = unify_graded(parse_avm("[NUM:{sg}!2.0 PER:{3}!1.0]"), parse_avm("[NUM:{pl}!2.0]"), 0.3)
        assert r.ok
        assert r.strength == pytest.approx(1 / 3, abs=1e-9)
        assert fs_equal(r.result, parse_avm("[NUM:{sg:0.5, pl:0.5}!2.0 PER:{3}!1.0]"))

    def test_unique_features(self):
        r = unify_graded(parse_avm("[NUM:{sg}!1.0]"), parse_avm("[PER:{3}!1.0]"), 1.0)
        assert r.strength == 1.0
        assert fs_equal(r.result, parse_avm("[NUM:{sg} PER:{3}]"))

    @pytest.mark.parametrize("threshold", [0.0, 0.5, 1.0])
    def test_empty_partner(self, threshold):
        a = parse_avm("[NUM:{sg}!2 SUBJ:[ANIM:{+}]]")
        r = unify_graded(a, EMPTY, threshold)
        assert r.strength == 1.0 and fs_equal(r.result, a)

    def test_empty_vs_empty(self):
        assert unify_graded(EMPTY, EMPTY).strength == 1.0

    def test_threshold_failure_keeps_strength(self):
        r = unify_graded(parse_avm("[NUM:{sg}]"), parse_avm("[NUM:{pl}]"), 0.5)
        assert not r and r.result is None
        assert r.strength == 0.0 and not r.clash

    def test_below_threshold_reports_computed_strength(self):
        r = unify_graded(parse_avm("[NUM:{sg}!2 PER:{3}]"), parse_avm("[NUM:{pl}!2]"), 0.5)
        assert not r.ok and r.strength == pytest.approx(1 / 3)

    def test_structural_clash(self):
        r = unify_graded(parse_avm("[A:{x}]"), parse_avm("[A:[B:{x}]]"))
        assert r.clash and r.strength == 0.0 and r.result is None

    def test_empty_node_takes_atom(self):
        r = unify_graded(parse_avm("[A:[]]"), parse_avm("[A:{x}!2]"), 1.0)
        assert fs_equal(r.result, parse_avm("[A:{x}!2]"))

    def test_result_priority_is_mean(self):
        r = unify_graded(parse_avm("[A:{x}!1]"), parse_avm("[A:{x}!3]"))
        assert r.result.priority("A") == 2.0

    def test_reentrancy_propagates(self):
        a = parse_avm("[SUBJ: #1 [] AGR: #1]")
        r = unify_graded(a, parse_avm("[SUBJ:[NUM:{sg}]]"))
        assert r.result["SUBJ"] is r.result["AGR"]
        assert dict(r.result["AGR"]["NUM"]) == {"sg": 1.0}

    def test_shared_paths_counted_per_path(self):
        a = parse_avm("[X: #1 [N:{sg}] Y: #1]")
        b = parse_avm("[X:[N:{sg}] Y:[N:{pl}]]")
        assert unify_graded(a, b).strength == pytest.approx(0.5)
        assert path_formula_strength(a, b) == pytest.approx(0.5)

    def test_induced_merge_is_counted(self):
        # sharing through an empty node makes sg and pl meet, though no
        # path of either input aligns them
        a = parse_avm("[X: #1 [] Y: #1]")
        b = parse_avm("[X:[N:{sg}] Y:[N:{pl}]]")
        r = unify_graded(a, b)
        assert dict(r.result["X"]["N"]) == {"pl": 0.5, "sg": 0.5}
        assert r.strength == pytest.approx(2 / 3)
        assert graded_strength(a, b) == pytest.approx(1.0)
        assert unify_graded(b, a).strength == pytest.approx(2 / 3)

    def test_cycle_is_a_clash(self):
        r = unify_graded(parse_avm("[A: #1 [] B: #1]"), parse_avm("[A: [C: #2 []] B: #2]"))
        assert r.clash

    def test_inputs_untouched(self):
        a, b = parse_avm("[A:{x} B:[C:{y}]]"), parse_avm("[A:{z} B:[D:{w}]]")
        ta, tb = atomic_paths(a), atomic_paths(b)
        unify_graded(a, b)
        assert atomic_paths(a) == ta and atomic_paths(b) == tb

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            unify_graded(EMPTY, EMPTY, 1.5)

    def test_unify_within_propagates_to_siblings(self):
        rule = parse_avm("[M: [AGR: #1 []] D: [AGR: #1]]")
        roots, s, clash = unify_within((rule["M"], rule["D"]), 1, parse_avm("[AGR:[NUM:{pl}]]"))
        assert s == 1.0 and not clash
        assert dict(roots[0]["AGR"]["NUM"]) == {"pl": 1.0}
        assert roots[0]["AGR"] is roots[1]["AGR"]


class TestProperties:
    def test_symmetry_with_sharing(self):
        rng = seeded(3)
        for _ in range(300):
            a = with_sharing(rng, random_fs(rng))
            b = with_sharing(rng, random_fs(rng))
            r1, r2 = unify_graded(a, b), unify_graded(b, a)
            assert r1.strength == pytest.approx(r2.strength, abs=1e-9)
            assert r1.ok == r2.ok
            if r1.ok:
                assert fs_equal(r1.result, r2.result)

    def test_perfection(self):
        rng = seeded(4)
        for _ in range(300):
            a = random_fs(rng, max_feats=3)
            b = random_fs(rng, max_feats=3)
            r = unify_graded(a, b)
            if r.clash:
                continue
            shared = {p: x for p, x, _ in atomic_paths(a)}
            agree = all(
                p not in shared or dict(x) == pytest.approx(dict(shared[p]), abs=1e-12)
                for p, x, _ in atomic_paths(b)
            )
            assert (abs(r.strength - 1.0) <= 1e-9) == agree

    def test_mass_conservation(self):
        rng = seeded(5)
        for _ in range(300):
            r = unify_graded(random_fs(rng), random_fs(rng))
            if r.ok:
                for _, x, _ in atomic_paths(r.result):
                    assert sum(x.values()) == pytest.approx(1.0, abs=1e-9)

    def test_path_formula(self):
        rng = seeded(6)
        for _ in range(300):
            a, b = random_fs(rng), random_fs(rng)
            ref = path_formula_strength(a, b)
            r = unify_graded(a, b)
            if ref is None:
                assert r.clash
            else:
                assert r.strength == pytest.approx(ref, abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**6))
    def test_classical_embedding(self, seed):
        rng = seeded(seed)
        a = random_fs(rng, max_feats=4, singleton=True, uniform=True, empty_p=0.2)
        b = random_fs(rng, max_feats=4, singleton=True, uniform=True, empty_p=0.2)
        if rng.random() < 0.5:
            a = with_sharing(rng, a)
        ref = classical_unify(a, b)
        r = unify_graded(a, b, 1.0)
        assert r.ok == (ref is not None)
        if ref is not None:
            assert fs_equal(r.result, ref)


def test_structures_are_fresh():
    a = parse_avm("[A:[B:{x}]]")
    r = unify_graded(a, EMPTY)
    assert r.result is not a and isinstance(r.result, FeatureStructure)
