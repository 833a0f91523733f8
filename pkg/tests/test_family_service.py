from fractions import Fraction

import pytest

from models.errors import DegeneratePairError, ScheduleError
from models.group_element import Mobius
from models.space import QGParams
from models.word import Word
from services.counting_service import CountingFunctional, QMDescriptor
from services.family_service import ExponentSchedule, FamilyService
from services.group_action import reduced_words


def w(text):
    return Word.parse(text)


@pytest.fixture(scope="module")
def service(builder):
    return FamilyService(builder)


def descriptor(space, word, W=1):
    return QMDescriptor(CountingFunctional.for_word(word, W), space.vertex(Word.identity()), space)


def test_default_schedule():
    schedule = ExponentSchedule.default(6)
    assert [q[0] for q in schedule.quadruples] == [1, 5, 20, 80, 320, 1280]
    assert schedule.quadruples[1] == (5, 6, 7, 8)
    assert len(schedule) == 6
    assert ExponentSchedule.parse("default", 3) == ExponentSchedule.default(3)
    assert ExponentSchedule.parse("1,2,3,4;5,6,7,8").quadruples == ((1, 2, 3, 4), (5, 6, 7, 8))


@pytest.mark.parametrize("quadruples", [
    (),
    ((0, 1, 2, 3),),
    ((1, 2, 2, 3),),
    ((1, 2, 3, 4), (4, 5, 6, 7)),
    ((1, 2, 3),),
])
def test_schedule_validation(quadruples):
    with pytest.raises(ScheduleError):
        ExponentSchedule(quadruples)


def test_schedule_parse_and_prefix_errors():
    with pytest.raises(ScheduleError):
        ExponentSchedule.parse("1,2,x,4")
    with pytest.raises(ScheduleError):
        ExponentSchedule.default(0)
    with pytest.raises(ScheduleError):
        ExponentSchedule(((1, 2, 3, 4),), prefixes=((1, 1), (2, 2)))
    with pytest.raises(ScheduleError):
        ExponentSchedule(((1, 2, 3, 4),), prefixes=((0, 1),))


def test_make_family(service):
    family = service.make_family(w("a"), w("b"), ExponentSchedule.default(2))
    assert family[0] == w("abbaaaBBBB")
    assert len(family[1]) == 26
    assert all(member.is_cyclically_reduced for member in family)
    assert family[0].cyclic_reduce() == (Word.identity(), family[0])


def test_make_family_with_prefixes(service):
    schedule = ExponentSchedule(((2, 3, 4, 5),), prefixes=((1, 1),))
    assert service.make_family(w("a"), w("b"), schedule) == [w("ABaabbbaaaaBBBBB")]


@pytest.mark.parametrize("g1,g2", [("a", "aa"), ("1", "b"), ("ab", "abab")])
def test_degenerate_pairs(service, g1, g2):
    with pytest.raises(DegeneratePairError):
        service.make_family(w(g1), w(g2), ExponentSchedule.default(1))


def test_commutator_variant(service):
    first, second = service.commutator_variant(w("a"), w("b"), 1, 2, 3, 4)
    assert first == w("abbAAB")
    assert first.exponent_sums() == {1: -1, 2: 1}
    assert second == w("aaabbbbAAABBBB")
    assert second.exponent_sums() == {}

    balanced, _ = service.commutator_variant(w("a"), w("b"), 1, 2, 3, 4, balanced=True)
    assert balanced == w("abbABB")
    assert balanced.exponent_sums() == {}

    with pytest.raises(ScheduleError):
        service.commutator_variant(w("a"), w("b"), 2, 1, 3, 4)


def test_certificate_for_two_members(service):
    family = service.make_family(w("a"), w("b"), ExponentSchedule.default(2))
    report = service.independence_certificate(family, n_max=5)
    assert report.accepted
    assert [[cell['h_value'] for cell in row['rows']] for row in report.growth] == [[1, 2, 3, 4, 5]] * 2
    assert report.slopes == [pytest.approx(1.0)] * 2
    assert report.off_diagonal == [{'i': 2, 'j': 1, 'values': [0, 0, 0, 0, 0], 'max_abs': 0}]
    assert report.abelianization_trivial is False

    document = report.to_dict()
    assert document['schema_version'] == 1
    assert document['members'] == [str(f) for f in family]
    assert document['abelianization'] == [{'1': 4, '2': -2}, {'1': 12, '2': -2}]


def test_certificate_single_member(service):
    report = service.independence_certificate([w("ab")], n_max=3)
    assert report.accepted
    assert report.off_diagonal == []
    assert report.growth[0]['competitor_checks'][0]['ok']


def test_certificate_rejects_bad_input(service):
    with pytest.raises(DegeneratePairError):
        service.independence_certificate([w("ab"), Word.identity()])
    with pytest.raises(ValueError):
        service.independence_certificate([])
    with pytest.raises(ScheduleError):
        service.independence_certificate([w("ab")], powers=[0])


def test_ell1_combination(service, f2_ball_6):
    descs = [descriptor(f2_ball_6, w("ab")), descriptor(f2_ball_6, w("aB"))]

    zero = service.ell1_combination([0, 0], descs, w("abab"))
    assert zero.value == 0
    assert zero.contributions == []

    first = service.ell1_combination([1], descs, w("abab"))
    assert first.value == 2

    mixed = service.ell1_combination([Fraction(1, 2), 2], descs, w("abab"))
    assert mixed.value == 1
    assert mixed.nonzero == 1
    assert mixed.cutoff == 2
    assert mixed.criterion_holds

    g = w("abaB")
    left = service.ell1_combination([1, 3], descs, g).value + service.ell1_combination([2, -1], descs, g).value
    assert left == service.ell1_combination([3, 2], descs, g).value

    with pytest.raises(ValueError):
        service.ell1_combination([1, 1, 1], descs, g)


def test_ell1_vanishing_on_short_elements(service, f2_ball_4):
    family = service.make_family(w("a"), w("b"), ExponentSchedule.default(6))
    descs = [descriptor(f2_ball_4, f) for f in family]
    for g in (w("a"), w("abA"), w("bbb")):
        result = service.ell1_combination([1] * 6, descs, g)
        assert result.nonzero == 0
        assert result.cutoff == 0
        assert result.criterion_holds


def test_product_qm(service, f2_ball_6):
    desc = descriptor(f2_ball_6, w("ab"))
    assert service.product_qm(desc, 1, [0], [w("ab")]) == 1
    assert service.product_qm(desc, 3, [0, 1, 2], [Word.identity()] * 3) == 0
    assert service.product_qm(desc, 3, [2, 0, 1], [w("ab"), w("abab"), w("b")]) == 3
    with pytest.raises(ValueError):
        service.product_qm(desc, 3, [0, 0, 1], [w("ab"), w("a"), w("b")])
    with pytest.raises(ValueError):
        service.product_qm(desc, 2, [0, 1], [w("ab")])


def test_orbit_map():
    assert FamilyService.orbit_map(w("ab"), w("b"), w("aB")) == w("a")
    assert FamilyService.orbit_map(w("aa"), w("bb"), Word.identity()) == Word.identity()

    m1, m2 = Mobius.parse("[[1,2],[0,1]]"), Mobius.parse("[[1,0],[2,1]]")
    assert FamilyService.orbit_map(m1, m2, w("ab")) == m1 * m2
    assert FamilyService.orbit_map(m1, m2, w("A")) == m1.inverse()
    with pytest.raises(ValueError):
        FamilyService.orbit_map(m1, m2, w("c"))


def test_schottky_embedding(service, f2_ball_6):
    report = service.schottky_embedding_check(f2_ball_6, w("aa"), w("bb"), 0, 3, QGParams(1, 0))
    assert report.embedded
    assert report.checked == 36
    assert report.skipped == 0

    collapsed = service.schottky_embedding_check(f2_ball_6, w("a"), w("A"), 0, 3, QGParams(1, 0))
    assert not collapsed.embedded


def test_certificate_values_match_brute_force(service):
    family = service.make_family(w("a"), w("b"), ExponentSchedule.default(2))
    report = service.independence_certificate(family, n_max=2, oracle_check=True)
    assert report.accepted
    assert report.oracle_checked
    for row in report.growth:
        assert row['oracle_checked'] == [True, True]
        assert row['exact'] == [True, True]


def test_certificate_of_short_words_is_fully_brute_forced(service):
    report = service.independence_certificate([w("ab"), w("aB")], n_max=2, oracle_check=True)
    assert report.accepted
    assert [row['oracle_checked'] for row in report.growth] == [[True, True], [True, True]]
    assert report.off_diagonal[0]['values'] == [0, 0]


FROZEN_DEFECT_MAX = 1


def test_family_defects_stay_below_the_word_defect(service, f2_ball_6):
    counter = service.counter_for(f2_ball_6)
    ab_defect = counter.defect_estimate(descriptor(f2_ball_6, w("ab")), FamilyService.default_pairs(2, 2))
    assert ab_defect.defect == FROZEN_DEFECT_MAX

    family = service.make_family(w("a"), w("b"), ExponentSchedule.default(2))
    report = service.independence_certificate(family, n_max=2)
    assert [entry['i'] for entry in report.defects] == [1, 2]
    assert all(entry['defect'] <= FROZEN_DEFECT_MAX for entry in report.defects)
    assert all(entry['exact'] for entry in report.defects)


def test_certificate_rejects_truncated_values(service, f2_ball_4):
    report = service.independence_certificate([w("ab")], n_max=2, space=f2_ball_4)
    assert not report.accepted
    assert any("enlarge the tree" in failure for failure in report.failures)
    assert report.growth[0]['exact'] == [True, False]


def test_ell1_support_matches_cutoff(service, f2_ball_6):
    family = service.make_family(w("a"), w("b"), ExponentSchedule.default(6))
    descs = [descriptor(f2_ball_6, f) for f in family]
    for g in reduced_words(2, 3):
        result = service.ell1_combination([1] * 6, descs, g)
        assert result.nonzero == result.cutoff
        assert result.violations == []
