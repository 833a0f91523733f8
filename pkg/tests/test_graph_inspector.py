import numpy as np
import pytest

from models.errors import DisconnectedError, QuasimorphismError
from models.group_element import Slope
from models.space import QGParams, Space, Walk
from models.word import Word
from services.graph_inspector import GraphInspector, sample_triples
from services.space_builder import SpaceBuilder


def vertex(space, text):
    return space.vertex(Word.parse(text))


def test_bfs_distance_examples(f2_ball_4, builder):
    inspector = GraphInspector(f2_ball_4)
    assert inspector.bfs_distance(0, 0) == 0
    assert inspector.bfs_distance(vertex(f2_ball_4, "1"), vertex(f2_ball_4, "abab")) == 4
    assert inspector.bfs_distance(vertex(f2_ball_4, "aB"), vertex(f2_ball_4, "ab")) == 2

    farey = builder.build_farey_ball(50)
    farey_inspector = GraphInspector(farey)
    assert farey_inspector.bfs_distance(farey.vertex(Slope(0, 1)), farey.vertex(Slope(1, 0))) == 1


def test_disconnected():
    space = Space.from_edges([0, 1, 2], [(0, 1)])
    with pytest.raises(DisconnectedError):
        GraphInspector(space).bfs_distance(0, 2)


def test_bfs_distance_is_a_metric(farey_10):
    inspector = GraphInspector(farey_10)
    rng = np.random.default_rng(3)
    for x, y, z in sample_triples(farey_10.num_vertices, 200, rng):
        assert inspector.bfs_distance(x, y) == inspector.bfs_distance(y, x)
        assert inspector.bfs_distance(x, z) <= inspector.bfs_distance(x, y) + inspector.bfs_distance(y, z)


def test_geodesic(f2_ball_4, builder):
    inspector = GraphInspector(f2_ball_4)
    walk = inspector.geodesic(vertex(f2_ball_4, "1"), vertex(f2_ball_4, "ab"))
    assert f2_ball_4.walk_letters(walk) == list(Word.parse("ab"))
    assert inspector.geodesic(3, 3) == Walk.trivial(3)

    farey = builder.build_farey_ball(50)
    farey_inspector = GraphInspector(farey)
    u, v = farey.vertex(Slope(0, 1)), farey.vertex(Slope(2, 5))
    path = farey_inspector.geodesic(u, v)
    assert path.length == farey_inspector.bfs_distance(u, v) == 2
    assert farey.is_valid_walk(path)
    assert path == farey_inspector.geodesic(u, v)


def test_geodesic_lengths_match_distances(farey_10):
    inspector = GraphInspector(farey_10)
    for u in range(0, farey_10.num_vertices, 7):
        for v in range(0, farey_10.num_vertices, 5):
            assert inspector.geodesic(u, v).length == inspector.bfs_distance(u, v)


def test_delta_of_trees_is_zero(f2_ball_2):
    assert GraphInspector(f2_ball_2).delta_estimate("all") == 0


def test_delta_of_cycle_and_relabeling():
    cycle = SpaceBuilder.build_cycle(12)
    assert GraphInspector(cycle).delta_estimate("all") == 3

    relabeled = Space.from_edges(list(range(12)), [((5 * i) % 12, (5 * (i + 1)) % 12) for i in range(12)])
    assert GraphInspector(relabeled).delta_estimate("all") == 3


def test_delta_sample_is_bounded_by_exhaustive_value():
    inspector = GraphInspector(SpaceBuilder.build_cycle(12))
    triples = sample_triples(12, 50, np.random.default_rng(0))
    assert inspector.delta_estimate(triples) <= inspector.delta_estimate("all")


def test_is_quasigeodesic(f2_ball_4):
    inspector = GraphInspector(f2_ball_4)
    geodesic = inspector.geodesic(vertex(f2_ball_4, "1"), vertex(f2_ball_4, "abAb"))
    assert inspector.is_quasigeodesic(geodesic, QGParams(1, 0))

    backtrack = Walk((vertex(f2_ball_4, "1"), vertex(f2_ball_4, "a"), vertex(f2_ball_4, "1")))
    assert not inspector.is_quasigeodesic(backtrack, QGParams(1, 0))
    assert inspector.is_quasigeodesic(backtrack, QGParams(1, 2))


def test_oriented_close(builder):
    space = builder.build_free_tree_neighbourhood(2, [Word.parse("a" * 10), Word.parse("b" * 10)], 0)
    inspector = GraphInspector(space)
    along_a = inspector.geodesic(space.vertex(Word.identity()), space.vertex(Word.parse("a" * 10)))
    along_b = inspector.geodesic(space.vertex(Word.identity()), space.vertex(Word.parse("b" * 10)))
    assert inspector.oriented_close(along_a, along_a, 0)
    assert not inspector.oriented_close(along_a, along_a.reverse(), 0)
    assert not inspector.oriented_close(along_a, along_b, 2)


def test_qg_params_validation():
    with pytest.raises(ValueError):
        QGParams(0.5, 0)
    with pytest.raises(ValueError):
        QGParams(1, -1)


def test_space_invariants():
    with pytest.raises(QuasimorphismError):
        Space.from_edges([0, 1], [(0, 0)])
    with pytest.raises(QuasimorphismError):
        Space.from_edges([0, 1], [(0, 1), (1, 0)])
    with pytest.raises(QuasimorphismError):
        Space.from_edges([0, 1], [(0, 2)])


def test_json_codec(f2_ball_2, farey_10):
    for space in (f2_ball_2, farey_10):
        document = space.to_json()
        restored = Space.from_json(document)
        assert restored.to_json() == document
        assert restored.labels == space.labels
    assert [item['id'] for item in f2_ball_2.to_json()['vertices']] == list(range(f2_ball_2.num_vertices))


def test_farey_truncation_converges_from_above(builder):
    pairs = [(Slope(0, 1), Slope(7, 5)), (Slope(1, 0), Slope(3, 7)), (Slope(2, 3), Slope(-5, 4))]
    for row in builder.farey_distance_convergence(8, pairs):
        assert row['monotone']
        assert row['d_2Q'] <= row['d_Q']


def test_farey_delta_regression(builder):
    farey = builder.build_farey_ball(30)
    triples = sample_triples(farey.num_vertices, 10_000, np.random.default_rng(0))
    delta = GraphInspector(farey).delta_estimate(triples)
    assert 1 <= delta <= 2
    again = sample_triples(farey.num_vertices, 10_000, np.random.default_rng(0))
    assert GraphInspector(farey).delta_estimate(again) == delta
