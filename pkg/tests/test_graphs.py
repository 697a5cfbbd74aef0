from eightblocks.graphs import (
    deficient_right_set,
    maximum_bipartite_matching,
    tree_component_count,
)


def test_perfect_matching_on_complete_graph():
    adjacency = [[0, 1, 2] for _ in range(3)]
    size, match_of_right = maximum_bipartite_matching(adjacency, 3)
    assert size == 3
    assert sorted(match_of_right) == [0, 1, 2]


def test_matching_limited_by_neighborhoods():
    # three left vertices all pointing at the same right vertex
    adjacency = [[0], [0], [0]]
    size, _ = maximum_bipartite_matching(adjacency, 2)
    assert size == 1


def test_matching_requires_augmenting_paths():
    # greedy left-to-right assignment would get stuck at 2 without reassignment
    adjacency = [[0, 1], [0], [1, 2]]
    size, _ = maximum_bipartite_matching(adjacency, 3)
    assert size == 3


def test_deficient_set_violates_the_count_condition():
    adjacency = [[0], [0], [2]]
    size, match_of_right = maximum_bipartite_matching(adjacency, 4)
    assert size == 2
    deficient = deficient_right_set(adjacency, 4, match_of_right)
    # the returned right subset must have fewer neighbors than members
    neighbors = [
        u for u, nbrs in enumerate(adjacency) if any(v in deficient for v in nbrs)
    ]
    assert len(deficient) > len(neighbors)


def test_tree_components_empty_graph():
    # no edges: every node is an isolated tree
    assert tree_component_count(5, []) == 5


def test_tree_components_paths_and_cycles():
    path = [(0, 1, 1), (1, 2, 1)]
    assert tree_component_count(4, path) == 2  # the path plus one isolated node
    cycle = [(0, 1, 1), (1, 2, 1), (2, 0, 1)]
    assert tree_component_count(3, cycle) == 0
    doubled = [(0, 1, 2)]  # multiplicity two between two nodes is a cycle
    assert tree_component_count(2, doubled) == 0
    single = [(0, 1, 1)]
    assert tree_component_count(2, single) == 1


def test_tree_components_mixed():
    edges = [(0, 1, 1), (2, 3, 2), (4, 5, 1), (5, 6, 1)]
    # components: {0,1} tree, {2,3} cycle, {4,5,6} tree, {7} isolated
    assert tree_component_count(8, edges) == 3
