# models/space.py
"""
Graph substrate: spaces with unit-length edges, walks in them, and
quasi-geodesic parameters
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from .errors import QuasimorphismError
from .group_element import Slope
from .word import Letter, Word

FREE_TREE_KINDS = ('free_tree_ball', 'free_tree_neighbourhood')


@dataclass(frozen=True)
class Walk:
    """A finite walk given by its visited vertices; vertices may repeat"""
    vertices: Tuple[int, ...]
    copies: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'vertices', tuple(self.vertices))
        object.__setattr__(self, 'copies', tuple(self.copies))
        if not self.vertices:
            raise ValueError("a walk has at least its start vertex")

    @classmethod
    def trivial(cls, vertex: int) -> 'Walk':
        return cls((vertex,))

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def steps(self) -> List[Tuple[int, int]]:
        return list(zip(self.vertices, self.vertices[1:]))

    def reverse(self) -> 'Walk':
        return Walk(tuple(reversed(self.vertices)))

    def concat(self, other: 'Walk') -> 'Walk':
        if self.end != other.start:
            raise ValueError(f"cannot concatenate walks ending at {self.end} and starting at {other.start}")
        return Walk(self.vertices + other.vertices[1:])

    def sub(self, i: int, j: int) -> 'Walk':
        """Subwalk from index i to index j inclusive"""
        return Walk(self.vertices[i:j + 1])


@dataclass(frozen=True)
class QGParams:
    """(K, L) quasi-geodesic constants plus a closeness threshold C"""
    K: float = 1.0
    L: float = 0.0
    C: float = 0.0

    def __post_init__(self):
        if self.K < 1 or self.L < 0 or self.C < 0:
            raise ValueError(f"invalid quasi-geodesic parameters K={self.K}, L={self.L}, C={self.C}")


@dataclass
class Space:
    """
    A finite graph with stable integer vertex ids 0..n-1 and a label per
    vertex. Free-tree spaces label vertices by reduced words, Farey spaces
    by slopes. Spaces are not modified after construction.
    """
    graph: nx.Graph
    labels: Tuple[Any, ...]
    truncation: Optional[Dict[str, Any]] = None
    metadata: str = ""
    index: Dict[Any, int] = field(init=False, repr=False)
    adjacency: Dict[int, Tuple[int, ...]] = field(init=False, repr=False)
    edge_letters: Dict[Tuple[int, int], Letter] = field(init=False, repr=False)

    def __post_init__(self):
        self.labels = tuple(self.labels)
        if set(self.graph.nodes) != set(range(len(self.labels))):
            raise QuasimorphismError("vertex ids must be exactly 0..n-1, one per label")
        if nx.number_of_selfloops(self.graph):
            raise QuasimorphismError("spaces have no self-loops")
        self.index = {label: vertex for vertex, label in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise QuasimorphismError("vertex labels must be distinct")
        self.adjacency = {v: tuple(sorted(self.graph.adj[v])) for v in self.graph.nodes}
        self.edge_letters = {}
        if self.is_free_tree:
            for u, v in self.graph.edges:
                step = self.labels[u].inverse() * self.labels[v]
                if len(step) != 1:
                    raise QuasimorphismError(f"edge {self.labels[u]} - {self.labels[v]} is not a generator step")
                self.edge_letters[(u, v)] = step.letters[0]
                self.edge_letters[(v, u)] = step.letters[0].inverse()
        self.graph = nx.freeze(self.graph)

    # ------------------------------------------------------------------
    # construction helpers
    # ------------------------------------------------------------------
    @classmethod
    def from_edges(cls, labels: Sequence[Any], edges: Iterable[Tuple[int, int]],
                   truncation: Optional[Dict[str, Any]] = None, metadata: str = "") -> 'Space':
        graph = nx.Graph()
        graph.add_nodes_from(range(len(labels)))
        for u, v in edges:
            if u == v:
                raise QuasimorphismError(f"self-loop at vertex {u}")
            if u not in graph or v not in graph:
                raise QuasimorphismError(f"edge ({u}, {v}) has an endpoint that is not a vertex")
            if graph.has_edge(u, v):
                raise QuasimorphismError(f"duplicate edge ({u}, {v})")
            graph.add_edge(u, v)
        return cls(graph, tuple(labels), truncation, metadata)

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------
    @property
    def kind(self) -> str:
        if not self.truncation:
            return 'generic'
        return self.truncation.get('kind', 'generic')

    @property
    def is_free_tree(self) -> bool:
        return self.kind in FREE_TREE_KINDS

    @property
    def is_farey(self) -> bool:
        return self.kind == 'farey'

    @property
    def is_truncated(self) -> bool:
        return self.truncation is not None

    @property
    def rank(self) -> int:
        return int(self.truncation.get('rank', 0)) if self.truncation else 0

    @property
    def num_vertices(self) -> int:
        return len(self.labels)

    @property
    def num_edges(self) -> int:
        return self.graph.number_of_edges()

    def __contains__(self, vertex: int) -> bool:
        return isinstance(vertex, int) and 0 <= vertex < len(self.labels)

    def find(self, label: Any) -> Optional[int]:
        return self.index.get(label)

    def vertex(self, label: Any) -> int:
        vertex = self.index.get(label)
        if vertex is None:
            raise KeyError(f"{label} is not a vertex of {self.metadata or 'the space'}")
        return vertex

    def label(self, vertex: int) -> Any:
        return self.labels[vertex]

    def neighbors(self, vertex: int) -> Tuple[int, ...]:
        return self.adjacency[vertex]

    def is_edge(self, u: int, v: int) -> bool:
        return self.graph.has_edge(u, v)

    def edge_letter(self, u: int, v: int) -> Letter:
        return self.edge_letters[(u, v)]

    def walk_letters(self, walk: Walk) -> List[Letter]:
        return [self.edge_letters[step] for step in walk.steps]

    def is_valid_walk(self, walk: Walk) -> bool:
        return walk.start in self and all(self.graph.has_edge(u, v) for u, v in walk.steps)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_json(self) -> Dict[str, Any]:
        return {
            'vertices': [{'id': v, 'label': str(label)} for v, label in enumerate(self.labels)],
            'edges': sorted([min(u, v), max(u, v)] for u, v in self.graph.edges),
            'truncation': self.truncation,
            'metadata': self.metadata,
        }

    @classmethod
    def from_json(cls, document: Dict[str, Any]) -> 'Space':
        truncation = document.get('truncation')
        kind = truncation.get('kind') if truncation else None
        if kind in FREE_TREE_KINDS:
            parse = Word.parse
        elif kind == 'farey':
            parse = Slope.parse
        else:
            parse = str
        vertices = sorted(document['vertices'], key=lambda item: item['id'])
        if [item['id'] for item in vertices] != list(range(len(vertices))):
            raise QuasimorphismError("vertex ids must be exactly 0..n-1")
        labels = [parse(item['label']) for item in vertices]
        edges = [tuple(edge) for edge in document['edges']]
        return cls.from_edges(labels, edges, truncation, document.get('metadata', ""))
