import itertools

import pytest

from models.errors import BudgetExceededError
from models.group_element import Slope
from models.space import Walk
from models.word import Word
from services.brute_force_oracle import BruteForceOracle
from services.counting_service import (CountingFunctional, CountingService, OracleMismatchError,
                                       QMDescriptor, fit_slope)
from services.family_service import FamilyService
from services.group_action import GroupActionService, reduced_words


def w(text):
    return Word.parse(text)


def vertex(space, text):
    return space.vertex(w(text))


def descriptor(space, text, W=1):
    return QMDescriptor(CountingFunctional.for_word(w(text), W), space.vertex(Word.identity()), space)


@pytest.fixture(scope="module")
def counter6(f2_ball_6):
    return CountingService(f2_ball_6)


def test_functional_constants():
    f = CountingFunctional.for_word(w("ab"))
    assert f.K_star == pytest.approx(2.0)
    assert f.L_star == pytest.approx(4.0)
    assert f.budget(4) == 8
    assert f.budget(0) == 0
    assert f.tree_margin == 2
    assert f.inverse().pattern.word == w("BA")

    g = CountingFunctional.for_word(w("abab"), 3)
    assert g.budget(2) == 8
    assert g.describe()['exact_pattern']


@pytest.mark.parametrize("text,W", [("ab", 0), ("ab", 2), ("a", 1), ("abab", 5)])
def test_invalid_W(text, W):
    with pytest.raises(ValueError):
        CountingFunctional.for_word(w(text), W)


def test_cw_on_diagonal_is_zero(f2_ball_4):
    counter = CountingService(f2_ball_4)
    f = CountingFunctional.for_word(w("ab"))
    for v in range(0, f2_ball_4.num_vertices, 11):
        result = counter.cw_value(f, v, v)
        assert result.value == 0
        assert result.walk == Walk.trivial(v)


def test_cw_examples(counter6, f2_ball_6):
    f = CountingFunctional.for_word(w("ab"))
    result = counter6.cw_value(f, 0, vertex(f2_ball_6, "abab"))
    assert result.value == 2
    assert result.distance == 4
    assert result.budget == 8
    assert result.exact

    desc = descriptor(f2_ball_6, "ab")
    assert counter6.hw_value(desc, w("ababab")) == 3
    assert counter6.hw_value(desc, w("BABABA")) == -3


def test_h_is_antisymmetric(counter6, f2_ball_6):
    for text in ("ab", "abAB"):
        desc = descriptor(f2_ball_6, text)
        for g in reduced_words(2, 2):
            value = counter6.hw_value(desc, g)
            assert isinstance(value, int)
            assert counter6.hw_value(desc, g.inverse()) == -value


def test_reversal_duality(counter6, f2_ball_6):
    f = CountingFunctional.for_word(w("aB"))
    points = [vertex(f2_ball_6, text) for text in ("1", "a", "aB", "b", "aBaB", "Ab")]
    for x, y in itertools.product(points, repeat=2):
        assert counter6.cw_value(f, x, y).value == counter6.cw_value(f.inverse(), y, x).value


def test_equivariance_in_tree(counter6, f2_ball_6):
    action = counter6.action
    f = CountingFunctional.for_word(w("ab"))
    ball = [vertex(f2_ball_6, str(g)) for g in reduced_words(2, 2)]
    for g in reduced_words(2, 2):
        for x, y in itertools.product(ball, repeat=2):
            moved = counter6.cw_value(f, action.apply_action(g, x), action.apply_action(g, y))
            assert moved.exact
            assert moved.value == counter6.cw_value(f, x, y).value


def test_long_words_vanish(counter6, f2_ball_6):
    long_desc = descriptor(f2_ball_6, "abababababab")
    short_desc = descriptor(f2_ball_6, "abAB")
    for g in reduced_words(2, 2):
        assert counter6.hw_value(long_desc, g) == 0
        assert counter6.hw_value(short_desc, g) == 0


@pytest.mark.parametrize("text,W", [("ab", 1), ("abab", 1), ("abab", 3), ("abAB", 1), ("abAB", 3)])
def test_vanishing_below_the_word_length(f2_ball_4, text, W):
    counter = CountingService(f2_ball_4)
    f = CountingFunctional.for_word(w(text), W)
    for x, y in itertools.product(range(f2_ball_4.num_vertices), repeat=2):
        if len(w(text)) > counter.inspector.bfs_distance(x, y) + W:
            assert counter.cw_value(f, x, y).value == 0


@pytest.mark.parametrize("text", ["aabbA", "abaBBa", "abababAB", "aabbaabbAB", "abababababab"])
def test_long_words_vanish_near_the_identity(f2_ball_4, text):
    counter = CountingService(f2_ball_4)
    f = CountingFunctional.for_word(w(text))
    for y in range(f2_ball_4.num_vertices):
        if len(w(text)) > counter.inspector.bfs_distance(0, y) + 1:
            assert counter.cw_value(f, 0, y).value == 0
            assert counter.cw_value(f.inverse(), 0, y).value == 0


def test_truncated_ball_gives_lower_bounds(builder, counter6, f2_ball_6):
    f = CountingFunctional.for_word(w("abab"), 3)
    small = builder.build_free_tree_ball(2, 3)
    truncated = CountingService(small).cw_value(f, vertex(small, "1"), vertex(small, "aba"))
    assert truncated.value == 0
    assert not truncated.exact

    larger = counter6.cw_value(f, 0, vertex(f2_ball_6, "aba"))
    assert larger.value == 1
    assert not larger.exact
    assert truncated.value <= larger.value


def test_exactness_follows_the_tree_margin(counter6, f2_ball_6):
    f = CountingFunctional.for_word(w("ab"))
    assert counter6.cw_value(f, 0, vertex(f2_ball_6, "abab")).exact
    far = counter6.cw_value(f, 0, vertex(f2_ball_6, "ababab"))
    assert far.value == 3
    assert not far.exact

    desc = descriptor(f2_ball_6, "ab")
    assert counter6.hw_is_exact(desc, w("abab"))
    assert not counter6.hw_is_exact(desc, w("ababab"))


def test_tube_with_margin_is_exact(builder):
    f = CountingFunctional.for_word(w("abab"))
    target = w("ab").power(3)
    space = builder.build_free_tree_neighbourhood(2, [target], f.tree_margin)
    result = CountingService(space).cw_value(f, vertex(space, "1"), vertex(space, str(target)))
    assert result.exact
    assert result.value == 1


def test_cw_upper_bound(f2_ball_4):
    counter = CountingService(f2_ball_4)
    for text, W in [("ab", 1), ("abab", 3), ("abAB", 1)]:
        f = CountingFunctional.for_word(w(text), W)
        for y in range(0, f2_ball_4.num_vertices, 9):
            d = counter.inspector.bfs_distance(0, y)
            if f.budget(d) > 12:
                continue
            value = counter.cw_value(f, 0, y).value
            assert 0 <= value <= d * W / len(w(text))


@pytest.mark.parametrize("text", ["ab", "abab", "abAB"])
def test_solver_agrees_with_brute_force(f2_ball_4, text):
    counter = CountingService(f2_ball_4)
    oracle = BruteForceOracle(f2_ball_4, counter.inspector)
    vertices = range(f2_ball_4.num_vertices)
    word = w(text)
    checked = 0
    for W in sorted({1, len(word) - 1}):
        f = CountingFunctional.for_word(word, W)
        for x, y in itertools.product(vertices, repeat=2):
            if f.budget(counter.inspector.bfs_distance(x, y)) > 8:
                continue
            result = counter.cw_value(f, x, y)
            assert result.value == oracle.value(f, x, y)
            assert counter.inspector.is_quasigeodesic(result.walk, f.qg_params())
            checked += 1
    assert checked > f2_ball_4.num_vertices


def test_witness_walk_is_consistent(counter6, f2_ball_6):
    f = CountingFunctional.for_word(w("ab"))
    walk, copies = counter6.optimal_walk(f, vertex(f2_ball_6, "B"), vertex(f2_ball_6, "ababa"))
    result = counter6.cw_value(f, vertex(f2_ball_6, "B"), vertex(f2_ball_6, "ababa"))
    assert f2_ball_6.is_valid_walk(walk)
    assert walk.length - f.W * len(copies) == result.distance - result.value
    assert f.pattern.count_on(f2_ball_6, walk) == len(copies)
    letters = f2_ball_6.walk_letters(walk)
    for start in copies:
        assert tuple(letters[start:start + 2]) == w("ab").letters


def test_geodesic_lower_bound(counter6, f2_ball_6):
    f = CountingFunctional.for_word(w("ab"))
    for text in ("ab", "abab", "Baba", "aab"):
        y = vertex(f2_ball_6, text)
        assert counter6.geodesic_lower_bound(f, 0, y) <= counter6.cw_value(f, 0, y).value


def test_budget_cap(f2_ball_4):
    counter = CountingService(f2_ball_4, budget_cap=3)
    with pytest.raises(BudgetExceededError):
        counter.cw_value(CountingFunctional.for_word(w("ab")), 0, vertex(f2_ball_4, "ab"))


def test_label_pattern_needs_a_tree(farey_10):
    counter = CountingService(farey_10)
    with pytest.raises(ValueError):
        counter.cw_value(CountingFunctional.for_word(w("ab")), 0, 1)


def test_translates_on_farey_match_brute_force(farey_10):
    action = GroupActionService(farey_10)
    path = Walk(tuple(farey_10.vertex(Slope.parse(s)) for s in ("0/1", "1/0", "1/1")))
    f = CountingFunctional.for_translates(action.enumerate_translates(path, 2))
    assert not f.pattern.exact
    assert f.pattern.walks[0] == path.vertices

    counter = CountingService(farey_10, action=action)
    oracle = BruteForceOracle(farey_10, counter.inspector)
    x = farey_10.vertex(Slope(0, 1))
    for target in ("1/1", "1/2", "2/1"):
        y = farey_10.vertex(Slope.parse(target))
        result = counter.cw_value(f, x, y)
        assert not result.exact
        assert result.value == oracle.value(f, x, y)
        assert farey_10.is_valid_walk(result.walk)


def test_defect_estimate(counter6, f2_ball_6):
    desc = descriptor(f2_ball_6, "ab")
    assert counter6.defect_estimate(desc, [(w("a"), w("b"))]).defect == 1
    assert counter6.defect_estimate(desc, [(w("ab"), w("BA"))]).defect == 0

    report = counter6.defect_estimate(desc, FamilyService.default_pairs(2, 2), sample_spec="radius 2")
    assert report.defect == 1
    assert report.evaluated == 17 * 17
    assert report.to_dict()['sample'] == "radius 2"
    assert report.exact


def test_defect_skips_pairs_outside(f2_ball_2):
    counter = CountingService(f2_ball_2)
    desc = descriptor(f2_ball_2, "ab")
    report = counter.defect_estimate(desc, [(w("aa"), w("aa")), (w("a"), w("A"))], skip_outside=True)
    assert report.skipped == 1
    assert report.evaluated == 1


def test_growth_along_the_word(builder):
    space = builder.build_free_tree_neighbourhood(2, [w("ab").power(6)], 2)
    counter = CountingService(space)
    report = counter.growth_on_cyclic(descriptor(space, "ab"), w("ab"), 6)
    assert report.values == [1, 2, 3, 4, 5, 6]
    assert report.exact == [True] * 6
    assert report.slope == pytest.approx(1.0)
    assert report.competitor_ok
    assert len(report.competitor_checks) == 6
    assert report.to_dict()['rows'][0] == {'n': 1, 'h_value': 1}


def test_growth_vanishes_off_the_word(builder):
    space = builder.build_free_tree_neighbourhood(2, [w("aB").power(4)], 2)
    counter = CountingService(space)
    report = counter.growth_on_cyclic(descriptor(space, "abab"), w("aB"), 4)
    assert report.values == [0, 0, 0, 0]
    assert report.competitor_checks == []

    trivial = counter.growth_on_cyclic(descriptor(space, "abab"), Word.identity(), 3)
    assert trivial.values == [0, 0, 0]
    assert trivial.slope == pytest.approx(0.0, abs=1e-9)


def test_growth_with_oracle(counter6, f2_ball_6):
    oracle = BruteForceOracle(f2_ball_6, counter6.inspector)
    report = counter6.growth_on_cyclic(descriptor(f2_ball_6, "ab"), w("ab"), 2, oracle=oracle)
    assert report.oracle_checked == [True, True]


class _FixedOracle:
    def __init__(self, value=None, error=None):
        self._value = value
        self._error = error

    def value(self, f, x, y):
        if self._error is not None:
            raise self._error
        return self._value


def test_cross_check_outcomes(counter6, f2_ball_6):
    desc = descriptor(f2_ball_6, "ab")
    with pytest.raises(OracleMismatchError):
        counter6.cross_check(_FixedOracle(value=99), desc, w("ab"))
    assert not counter6.cross_check(_FixedOracle(error=BudgetExceededError("too many walks")), desc, w("ab"))


def test_fit_slope():
    assert fit_slope([]) == 0.0
    assert fit_slope([3]) == 3.0
    assert fit_slope([2, 4, 6]) == pytest.approx(2.0)
