import pytest

from models.word import Word
from services.space_builder import SpaceBuilder


def words(*texts):
    return [Word.parse(text) for text in texts]


@pytest.fixture(scope="session")
def builder():
    return SpaceBuilder()


@pytest.fixture(scope="session")
def f2_ball_2(builder):
    return builder.build_free_tree_ball(2, 2)


@pytest.fixture(scope="session")
def f2_ball_4(builder):
    return builder.build_free_tree_ball(2, 4)


@pytest.fixture(scope="session")
def f2_ball_6(builder):
    return builder.build_free_tree_ball(2, 6)


@pytest.fixture(scope="session")
def farey_10(builder):
    return builder.build_farey_ball(10)


@pytest.fixture(scope="session")
def farey_60(builder):
    return builder.build_farey_ball(60)
