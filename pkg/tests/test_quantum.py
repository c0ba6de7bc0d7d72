from fractions import Fraction as F

import pytest

from sievelogic.exact import identity_matrix, matrix, projector_leq, zero_matrix
from sievelogic.fincat import UnknownObject, arrows_from
from sievelogic.heyting import (
    empty_sieve,
    is_sieve,
    principal_sieve,
    push_sieve,
)
from sievelogic.presheaf import (
    global_sections,
    is_natural,
    validate_presheaf,
)
from sievelogic.quantum import (
    DimensionMismatch,
    DuplicateEigenvalue,
    IncompleteBasis,
    IncompleteValuation,
    NameCollision,
    NotInSpectrum,
    NotOrthogonal,
    PartialFunction,
    SieveValuation,
    SpectralAlgebra,
    born_prob,
    build_operator_category,
    coarse_graining_presheaf,
    dual_presheaf,
    find_arrow,
    func_check,
    function_of,
    ks_global_section_search,
    make_operator,
    make_state,
    nu_state,
    nu_state_valuation,
    spectral_projector,
    spectrum_subsets,
    valuation_transformation,
)

from conftest import OPERATOR_CATEGORY_FIXTURES

HALF = matrix([[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]])


# --- construction ------------------------------------------------------------

def test_make_sigma_z(sigma_z):
    assert sigma_z.spectrum == (F(-1), F(1))
    assert sigma_z.projector_of(1) == matrix([[1, 0], [0, 0]])
    assert sigma_z.projector_of(-1) == matrix([[0, 0], [0, 1]])


def test_make_hadamard_basis(sigma_x):
    assert sigma_x.projector_of(1) == HALF


def test_make_operator_not_orthogonal():
    with pytest.raises(NotOrthogonal):
        make_operator("bad", 2, [(1, [(1, 0), (1, 1)])])


def test_make_operator_cross_eigenvalue_overlap():
    with pytest.raises((NotOrthogonal, IncompleteBasis)):
        make_operator("bad", 2, [(1, [(1, 0)]), (2, [(1, 1)])])


def test_make_operator_duplicate_eigenvalue():
    with pytest.raises(DuplicateEigenvalue):
        make_operator("bad", 2, [(1, [(1, 0)]), (1, [(0, 1)])])


def test_make_operator_incomplete():
    with pytest.raises(IncompleteBasis):
        make_operator("bad", 3, [(1, [(1, 0, 0)]), (2, [(0, 1, 0)])])


def test_make_operator_complex_entries():
    from sievelogic.exact import QC

    op = make_operator(
        "y", 2,
        [(1, [(1, QC(F(0), F(1)))]), (-1, [(1, QC(F(0), F(-1)))])],
    )
    p = op.projector_of(1)
    assert p[0][0] == QC(F(1, 2), F(0))
    assert p[0][1] == QC(F(0), F(-1, 2))
    assert p[1][0] == QC(F(0), F(1, 2))


def test_degenerate_eigenvalue_rank2():
    op = make_operator(
        "deg", 3,
        [(0, [(1, 0, 0), (0, 1, 0)]), (5, [(0, 0, 1)])],
    )
    assert op.projector_of(0) == matrix([[1, 0, 0], [0, 1, 0], [0, 0, 0]])


# --- functions of operators --------------------------------------------------

def test_function_identity(sigma_z):
    same = function_of(sigma_z, {F(1): 1, F(-1): -1}, name="copy")
    assert same.structural_key() == sigma_z.structural_key()


def test_function_square_merges(sigma_z):
    sq = function_of(sigma_z, {F(1): 1, F(-1): 1}, name="sq")
    assert sq.spectrum == (F(1),)
    assert sq.projectors == (identity_matrix(2),)


def test_function_relabels(sigma_z):
    op = function_of(sigma_z, {F(1): 3, F(-1): 7}, name="r")
    assert op.spectrum == (F(3), F(7))
    assert op.projector_of(3) == sigma_z.projector_of(1)


def test_function_partial(sigma_z):
    with pytest.raises(PartialFunction):
        function_of(sigma_z, {F(1): 1})


# --- spectral projectors -----------------------------------------------------

def test_projector_full_and_empty(sigma_z):
    assert spectral_projector(sigma_z, sigma_z.spectrum) == identity_matrix(2)
    assert spectral_projector(sigma_z, []) == zero_matrix(2)


def test_projector_singleton(sigma_z):
    assert spectral_projector(sigma_z, [1]) == matrix([[1, 0], [0, 0]])


def test_projector_not_in_spectrum(sigma_z):
    with pytest.raises(NotInSpectrum):
        spectral_projector(sigma_z, [2])


def test_spectral_algebra(sigma_z):
    alg = SpectralAlgebra(sigma_z)
    assert len(alg.elements()) == 4
    assert alg.atoms() == (frozenset({F(-1)}), frozenset({F(1)}))
    full = frozenset(sigma_z.spectrum)
    for d1 in alg.elements():
        assert alg.join(d1, alg.complement(d1)) == full
        assert alg.meet(d1, alg.complement(d1)) == frozenset()
        for d2 in alg.elements():
            assert alg.projector(alg.meet(d1, d2)) == mat_mul_commuting(
                alg.projector(d1), alg.projector(d2)
            )


def mat_mul_commuting(p, q):
    from sievelogic.exact import mat_mul

    assert mat_mul(p, q) == mat_mul(q, p)
    return mat_mul(p, q)


# --- arrows ------------------------------------------------------------------

def test_find_arrow_to_coarsening(sigma_z):
    one = function_of(sigma_z, {F(1): 1, F(-1): 1}, name="one")
    assert find_arrow(sigma_z, one) == {F(1): F(1), F(-1): F(1)}


def test_find_arrow_absent(sigma_z, sigma_x):
    assert find_arrow(sigma_z, sigma_x) is None
    assert find_arrow(sigma_x, sigma_z) is None


def test_find_arrow_identity(sigma_z):
    assert find_arrow(sigma_z, sigma_z) == {F(1): F(1), F(-1): F(-1)}


def test_find_arrow_dimension():
    a = make_operator("a", 2, [(1, [(1, 0)]), (2, [(0, 1)])])
    b = make_operator("b", 3, [(1, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])])
    with pytest.raises(DimensionMismatch):
        find_arrow(a, b)


def test_find_arrow_scaled_pair(sigma_z):
    doubled = make_operator("dz", 2, [(2, [(1, 0)]), (-2, [(0, 1)])])
    assert find_arrow(sigma_z, doubled) == {F(1): F(2), F(-1): F(-2)}
    assert find_arrow(doubled, sigma_z) == {F(2): F(1), F(-2): F(-1)}


# --- category building -------------------------------------------------------

def test_single_unclosed(sz_unclosed):
    assert len(sz_unclosed.base.objects) == 1
    assert len(sz_unclosed.base.arrows) == 1


def test_single_closed_objects(sz_closed):
    assert set(sz_closed.base.objects) == {
        "sigma_z", "sigma_z[1]", "sigma_z[-1]", "const0", "const1"
    }
    # The two questions are relabelings of sigma_z itself, so the three of
    # them form an isomorphism clique; each object also maps to both
    # constants: 5 identities + 6 + 6 + 2 = 19.
    assert len(sz_closed.base.arrows) == 19
    assert {a.cod for a in arrows_from(sz_closed.base, "sigma_z")} == {
        "sigma_z", "sigma_z[1]", "sigma_z[-1]", "const0", "const1"
    }


def test_question_projectors(sz_closed):
    q = sz_closed.operators["sigma_z[1]"]
    assert q.spectrum == (F(0), F(1))
    assert q.projector_of(1) == matrix([[1, 0], [0, 0]])


def test_two_incompatible_unclosed(zx_unclosed):
    assert len(zx_unclosed.base.objects) == 2
    assert len(zx_unclosed.base.arrows) == 2  # identities only


def test_zx_closed_counts(zx_closed):
    assert len(zx_closed.base.objects) == 8
    # Two isomorphism cliques of three, arrows into the two constants from
    # all six non-constant objects, the constant swap, and 8 identities:
    # 8 + 6 + 6 + 12 + 2 = 34.
    assert len(zx_closed.base.arrows) == 34
    cross = [
        a for a in zx_closed.base.arrows.values()
        if "sigma_z" in a.dom and "sigma_x" in a.cod
    ]
    assert not cross


def test_scaled_operators_stay_distinct(sigma_z):
    doubled = make_operator("dz", 2, [(2, [(1, 0)]), (-2, [(0, 1)])])
    ocat = build_operator_category([sigma_z, doubled])
    assert len(ocat.base.objects) == 2
    assert len(ocat.base.arrows) == 4  # identities plus both relabelings


def test_name_collision(sigma_z):
    copy = make_operator("sigma_z", 2, [(1, [(1, 0)]), (-1, [(0, 1)])])
    with pytest.raises(NameCollision):
        build_operator_category([sigma_z, copy])


def test_dimension_mismatch_category(sigma_z):
    other = make_operator("three", 3, [(1, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])])
    with pytest.raises(DimensionMismatch):
        build_operator_category([sigma_z, other])


@pytest.mark.parametrize("operator_category", OPERATOR_CATEGORY_FIXTURES, indirect=True)
def test_category_matches_pairwise_find_arrow(operator_category):
    ocat = operator_category
    names = ocat.base.objects
    endpoints = {(a.dom, a.cod): a.id for a in ocat.base.arrows.values()}
    for a_name in names:
        for b_name in names:
            fn = find_arrow(ocat.operators[a_name], ocat.operators[b_name])
            if fn is None:
                assert (a_name, b_name) not in endpoints
            else:
                aid = endpoints[(a_name, b_name)]
                assert ocat.arrow_functions[aid] == fn


@pytest.mark.parametrize("operator_category", OPERATOR_CATEGORY_FIXTURES, indirect=True)
def test_thinness(operator_category):
    endpoints = [(a.dom, a.cod) for a in operator_category.base.arrows.values()]
    assert len(endpoints) == len(set(endpoints))


@pytest.mark.parametrize("operator_category", OPERATOR_CATEGORY_FIXTURES, indirect=True)
def test_arrow_functions_reproduce_codomain(operator_category):
    ocat = operator_category
    for a in ocat.base.arrows.values():
        image = function_of(ocat.operators[a.dom], ocat.arrow_functions[a.id])
        assert image.structural_key() == ocat.operators[a.cod].structural_key()


def test_vshape_category_is_v_poset(vshape3):
    assert len(vshape3.base.objects) == 3
    assert len(vshape3.base.arrows) == 5
    outs = {a.cod for a in arrows_from(vshape3.base, "A")}
    assert outs == {"A", "B", "C"}
    assert len(arrows_from(vshape3.base, "B")) == 1


# --- Born probabilities ------------------------------------------------------

def test_born_eigenstate(sigma_z):
    up = make_state([1, 0])
    assert born_prob(up, sigma_z, [1]) == 1


def test_born_superposition(sigma_z):
    plus = make_state([1, 1])
    assert born_prob(plus, sigma_z, [1]) == F(1, 2)


def test_born_full_spectrum(sigma_z):
    psi = make_state([3, F(-2, 7)])
    assert born_prob(psi, sigma_z, sigma_z.spectrum) == 1


def test_born_complex_state(sigma_x):
    from sievelogic.exact import QC

    psi = make_state([QC(F(1), F(0)), QC(F(0), F(1))])
    assert born_prob(psi, sigma_x, [1]) == F(1, 2)


def test_born_sums_to_one(sigma_z, sigma_x):
    for op in (sigma_z, sigma_x):
        for entries in ([1, 2], [F(1, 3), F(-5)], [0, 1]):
            psi = make_state(entries)
            assert sum(born_prob(psi, op, [a]) for a in op.spectrum) == 1


def test_born_dimension_mismatch(sigma_z):
    with pytest.raises(DimensionMismatch):
        born_prob(make_state([1, 0, 0]), sigma_z, [1])


# --- dual and coarse-graining presheaves -------------------------------------

@pytest.mark.parametrize("operator_category", OPERATOR_CATEGORY_FIXTURES, indirect=True)
def test_dual_presheaf_sizes_and_laws(operator_category):
    ocat = operator_category
    d = dual_presheaf(ocat)
    check = validate_presheaf(d)
    assert check.ok, check.witness
    for name, op in ocat.operators.items():
        assert len(d.at(name)) == len(op.spectrum)


@pytest.mark.parametrize("operator_category", OPERATOR_CATEGORY_FIXTURES, indirect=True)
def test_coarse_graining_sizes_and_laws(operator_category):
    ocat = operator_category
    g = coarse_graining_presheaf(ocat)
    check = validate_presheaf(g)
    assert check.ok, check.witness
    for name, op in ocat.operators.items():
        assert len(g.at(name)) == 2 ** len(op.spectrum)


def test_dual_restriction_collapses(sigma_z):
    sq = function_of(sigma_z, {F(1): 1, F(-1): 1}, name="sq")
    ocat = build_operator_category([sigma_z, sq])
    d = dual_presheaf(ocat)
    (aid,) = [
        a.id for a in ocat.base.arrows.values()
        if a.dom == "sigma_z" and a.cod == "sq"
    ]
    assert d.map(aid) == {F(1): F(1), F(-1): F(1)}


def test_single_context_dual_sections(sz_unclosed):
    assert len(global_sections(dual_presheaf(sz_unclosed))) == 2


def test_coarse_graining_merge(sigma_z):
    sq = function_of(sigma_z, {F(1): 1, F(-1): 1}, name="sq")
    ocat = build_operator_category([sigma_z, sq])
    g = coarse_graining_presheaf(ocat)
    (aid,) = [
        a.id for a in ocat.base.arrows.values()
        if a.dom == "sigma_z" and a.cod == "sq"
    ]
    assert g.map(aid)[frozenset({F(1)})] == frozenset({F(1)})
    assert g.map(aid)[frozenset({F(1), F(-1)})] == frozenset({F(1)})
    assert g.map(aid)[frozenset()] == frozenset()


@pytest.mark.parametrize("operator_category", OPERATOR_CATEGORY_FIXTURES, indirect=True)
def test_monotone_coarse_graining(operator_category):
    # Coarser propositions are weaker: the projector can only grow.
    ocat = operator_category
    for arrow in ocat.base.arrows.values():
        fn = ocat.arrow_functions[arrow.id]
        dom_op, cod_op = ocat.operators[arrow.dom], ocat.operators[arrow.cod]
        for delta in spectrum_subsets(dom_op):
            image = frozenset(fn[v] for v in delta)
            assert projector_leq(
                spectral_projector(dom_op, delta),
                spectral_projector(cod_op, image),
            )


# --- state valuations --------------------------------------------------------

def test_nu_eigenstate_principal(sz_closed):
    up = make_state([1, 0])
    sieve = nu_state(sz_closed, up, "sigma_z", [1])
    assert sieve == principal_sieve(sz_closed.base, "sigma_z")


def test_nu_full_spectrum_principal(sz_closed):
    for entries in ([1, 0], [1, 1], [2, F(1, 3)]):
        psi = make_state(entries)
        sieve = nu_state(sz_closed, psi, "sigma_z", [1, -1])
        assert sieve == principal_sieve(sz_closed.base, "sigma_z")


def test_nu_superposition_total_coarsenings_only(sz_closed):
    plus = make_state([1, 1])
    sieve = nu_state(sz_closed, plus, "sigma_z", [1])
    assert sieve.members == {"sigma_z->const0", "sigma_z->const1"}
    assert "id_sigma_z" not in sieve.members


def test_nu_values_are_sieves(sz_closed, zx_closed):
    for ocat in (sz_closed, zx_closed):
        for entries in ([1, 0], [1, 1], [1, -2]):
            psi = make_state(entries)
            for name, op in ocat.operators.items():
                for delta in spectrum_subsets(op):
                    sieve = nu_state(ocat, psi, name, delta)
                    assert is_sieve(ocat.base, name, sieve.members)


def test_nu_projector_fixpoint_equals_probability_one(zx_closed):
    # Membership through the exact eigenvector condition agrees with
    # membership through certainty of the coarse-grained proposition.
    for entries in ([1, 0], [1, 1], [2, -3]):
        psi = make_state(entries)
        for name, op in zx_closed.operators.items():
            for delta in spectrum_subsets(op):
                sieve = nu_state(zx_closed, psi, name, delta)
                for arrow in arrows_from(zx_closed.base, name):
                    fn = zx_closed.arrow_functions[arrow.id]
                    image = frozenset(fn[v] for v in delta)
                    certain = born_prob(
                        psi, zx_closed.operators[arrow.cod], image
                    ) == 1
                    assert (arrow.id in sieve.members) == certain


def test_nu_empty_delta_is_empty_sieve(sz_closed):
    psi = make_state([1, 1])
    assert nu_state(sz_closed, psi, "sigma_z", []) == empty_sieve("sigma_z")


def test_nu_unknown_object(sz_closed):
    with pytest.raises(UnknownObject):
        nu_state(sz_closed, make_state([1, 0]), "nope", [1])


def test_nu_not_in_spectrum(sz_closed):
    with pytest.raises(NotInSpectrum):
        nu_state(sz_closed, make_state([1, 0]), "sigma_z", [7])


# --- functional composition --------------------------------------------------

def test_func_check_nu_state(zx_closed):
    for entries in ([1, 0], [1, 1], [1, -1], [3, 5]):
        valuation = nu_state_valuation(zx_closed, make_state(entries))
        assert func_check(valuation)


def test_func_check_principal_everywhere(sz_closed):
    values = {
        (name, delta): principal_sieve(sz_closed.base, name)
        for name, op in sz_closed.operators.items()
        for delta in spectrum_subsets(op)
    }
    assert func_check(SieveValuation(sz_closed, values))


def test_func_check_perturbed(sz_closed):
    valuation = nu_state_valuation(sz_closed, make_state([1, 1]))
    broken = dict(valuation.values)
    key = ("sigma_z", frozenset({F(1)}))
    assert broken[key].members  # the original value is a proper sieve
    broken[key] = empty_sieve("sigma_z")
    result = func_check(SieveValuation(sz_closed, broken))
    assert not result.ok
    assert result.witness is not None


def test_func_check_incomplete(sz_closed):
    valuation = nu_state_valuation(sz_closed, make_state([1, 1]))
    partial = dict(valuation.values)
    partial.pop(("sigma_z", frozenset({F(1)})))
    with pytest.raises(IncompleteValuation):
        func_check(SieveValuation(sz_closed, partial))


def test_func_check_equals_naturality(zx_closed):
    from sievelogic.presheaf import omega_presheaf

    g = coarse_graining_presheaf(zx_closed)
    om = omega_presheaf(zx_closed.base)
    valuation = nu_state_valuation(zx_closed, make_state([2, -1]))
    nt = valuation_transformation(valuation, g, om)
    assert func_check(valuation) and is_natural(nt)
    broken = dict(valuation.values)
    broken[("sigma_z", frozenset({F(1)}))] = empty_sieve("sigma_z")
    bad = SieveValuation(zx_closed, broken)
    nt_bad = valuation_transformation(bad, g, om)
    assert (not func_check(bad)) and (not is_natural(nt_bad).ok)


def test_func_check_along_pushforward_definition(sz_closed):
    valuation = nu_state_valuation(sz_closed, make_state([1, 1]))
    for arrow in sz_closed.base.arrows.values():
        fn = sz_closed.arrow_functions[arrow.id]
        for delta in spectrum_subsets(sz_closed.operators[arrow.dom]):
            image = frozenset(fn[v] for v in delta)
            assert valuation.values[(arrow.cod, image)] == push_sieve(
                sz_closed.base, arrow, valuation.values[(arrow.dom, delta)]
            )


# --- global-section search over the dual presheaf ----------------------------

def test_sz_closed_sections(sz_closed):
    assert len(ks_global_section_search(sz_closed)) == 2


def test_zx_closed_sections(zx_closed):
    secs = ks_global_section_search(zx_closed)
    assert len(secs) == 4


def test_colorable3_sections_match_coloring_oracle(colorable3):
    from oracles import enumerate_one_per_basis_colorings

    secs = ks_global_section_search(colorable3)
    # Five rays, two triads sharing ray 0.
    colorings = enumerate_one_per_basis_colorings(5, [(0, 1, 2), (0, 3, 4)])
    assert len(colorings) == 5
    assert len(secs) == 5
    # The rank-one questions biject sections with colorings.
    ray_questions = ["b1[1]", "b1[2]", "b1[3]", "b2[2]", "b2[3]"]
    induced = {
        tuple(int(sec.choice[q]) for q in ray_questions) for sec in secs
    }
    assert induced == set(colorings)


def test_dim2_categories_have_sections(sz_unclosed, sz_closed, zx_unclosed, zx_closed):
    for ocat in (sz_unclosed, sz_closed, zx_unclosed, zx_closed):
        assert len(ks_global_section_search(ocat)) >= 1
