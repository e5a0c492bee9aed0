"""
Stereo reference frames.

A chiral tag is stored relative to the neighbour order
``[implicit H if any] + ascending neighbour indices``: looking from the first
entry, the rest run anticlockwise for CCW ("@") and clockwise for CW ("@@").
An E/Z label is stored relative to the lowest-index substituent on each end
of the double bond. Renumbering that keeps relative index order leaves both
frames untouched; anything else goes through the helpers below.
"""

from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

from .molgraph import BondEdge, BondStereo, ChiralTag, MolGraph, pair

HYDROGEN = -1  # stands for the implicit hydrogen inside a neighbour order


def permutation_parity(source: Sequence[int], target: Sequence[int]) -> int:
    """0 if target is an even permutation of source, 1 if odd."""
    if sorted(source) != sorted(target):
        raise ValueError(f"orders {list(source)} and {list(target)} hold different items")
    position = {item: k for k, item in enumerate(target)}
    mapped = [position[item] for item in source]
    parity = 0
    seen = [False] * len(mapped)
    for start in range(len(mapped)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = mapped[k]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def reorder_chiral_tag(tag: ChiralTag, source: Sequence[int], target: Sequence[int]) -> ChiralTag:
    """Re-express a tag given relative to `source` order in terms of `target` order."""
    if tag is ChiralTag.NONE:
        return tag
    return tag.flipped() if permutation_parity(source, target) else tag


def chiral_reference(graph: MolGraph, i: int) -> List[int]:
    order = [HYDROGEN] if graph.total_h(i) > 0 else []
    return order + graph.neighbors(i)


def stereo_reference(graph: MolGraph, i: int, j: int) -> Optional[Tuple[int, int]]:
    """Lowest-index substituent on each end of bond (i, j); None if an end has none."""
    left = [k for k in graph.neighbors(i) if k != j]
    right = [k for k in graph.neighbors(j) if k != i]
    if not left or not right:
        return None
    return left[0], right[0]


def stereo_relative_to(graph: MolGraph, bond: BondEdge, k: int, m: int) -> BondStereo:
    """Label of `bond` seen from substituent k on bond.i and m on bond.j."""
    if bond.stereo is BondStereo.NONE:
        return bond.stereo
    reference = stereo_reference(graph, bond.i, bond.j)
    if reference is None:
        return bond.stereo
    label = bond.stereo
    if k != reference[0]:
        label = label.flipped()
    if m != reference[1]:
        label = label.flipped()
    return label


def stereo_in_default_frame(graph: MolGraph, i: int, j: int, label: BondStereo, k: int, m: int) -> BondStereo:
    """Convert a label given relative to substituents (k on i, m on j) to the stored frame."""
    if label is BondStereo.NONE:
        return label
    reference = stereo_reference(graph, i, j)
    if reference is None:
        return label
    if i > j:
        i, j, k, m = j, i, m, k
        reference = stereo_reference(graph, i, j)
    if k != reference[0]:
        label = label.flipped()
    if m != reference[1]:
        label = label.flipped()
    return label


def permute_graph(graph: MolGraph, permutation: Sequence[int]) -> MolGraph:
    """Relabel nodes so old node `k` becomes `permutation[k]`, keeping stereo meaning."""
    n = graph.num_nodes
    if sorted(permutation) != list(range(n)):
        raise ValueError("permutation must cover every node exactly once")
    if graph.has_supernode and permutation[n - 1] != n - 1:
        raise ValueError("the supernode must stay the last node")
    inverse = [0] * n
    for old, new in enumerate(permutation):
        inverse[new] = old

    edges: Dict[Tuple[int, int], BondEdge] = {}
    for (i, j), bond in graph.edges.items():
        a, b = pair(permutation[i], permutation[j])
        edges[(a, b)] = replace(bond, i=a, j=b)
    nodes = tuple(graph.nodes[inverse[new]] for new in range(n))
    moved = MolGraph(nodes, edges)

    def mapped(k: int) -> int:
        return k if k == HYDROGEN else permutation[k]

    for old, atom in enumerate(graph.nodes):
        if atom.chiral_tag is ChiralTag.NONE:
            continue
        new = permutation[old]
        before = [mapped(k) for k in chiral_reference(graph, old)]
        after = chiral_reference(moved, new)
        moved = moved.with_atom(new, replace(moved.nodes[new], chiral_tag=reorder_chiral_tag(atom.chiral_tag, before, after)))

    for (i, j), bond in graph.edges.items():
        if bond.stereo is BondStereo.NONE:
            continue
        reference = stereo_reference(graph, i, j)
        if reference is None:
            continue
        a, b = permutation[i], permutation[j]
        label = stereo_in_default_frame(moved, a, b, bond.stereo, permutation[reference[0]], permutation[reference[1]])
        moved = moved.with_bond(replace(moved.bond(a, b), stereo=label))
    return moved
