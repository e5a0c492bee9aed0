"""
Mapped reactions and their ingestion from reaction SMILES.

Usage:
    reaction = reaction_from_smiles("[CH3:1][C:2](=[O:3])[OH:4].[CH3:5][OH:6]>>[CH3:1][C:2](=[O:3])[O:6][CH3:5]",
                                    Direction.RETRO)
    reaction.source   # graph edits start from
    reaction.target   # graph edits must reach

In the retro direction the product is edited into the substrates; forward,
the substrates are edited until the product atoms carry the product's bonds.
The forward target therefore lives on the substrate atom set: product atoms
take the product's properties and bonds, every other atom keeps its own.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Set

from chem.aromaticity import normalize_hydrogens, perceive_aromaticity
from chem.molgraph import MolGraph
from chem.smiles_parser import parse_smiles
from chem.smiles_writer import canonical_smiles
from chem.stereo import permute_graph

from .exceptions import MappingError

logger = logging.getLogger(__name__)


class Direction(Enum):
    RETRO = "retro"
    FORWARD = "forward"


@dataclass(frozen=True)
class Reaction:
    substrates: MolGraph
    product: MolGraph
    reaction_class: Optional[int] = None
    direction: Direction = Direction.RETRO
    reaction_id: str = ""
    dropped_components: int = 0  # retro: substrate molecules with no atom in the product

    @property
    def source(self) -> MolGraph:
        return self.product if self.direction is Direction.RETRO else self.substrates

    @cached_property
    def target(self) -> MolGraph:
        if self.direction is Direction.RETRO:
            return self.substrates
        return _forward_target(self.substrates, self.product)

    @cached_property
    def correspondence(self) -> Dict[int, int]:
        """Source atom index -> target atom index; every source atom has a partner."""
        if self.direction is Direction.FORWARD:
            return {i: i for i in range(self.substrates.num_atoms)}
        by_map = self.substrates.map_index()
        return {i: by_map[atom.map_number] for i, atom in enumerate(self.product.nodes)}

    def __str__(self) -> str:
        label = self.reaction_id or "reaction"
        return f"{label} ({self.direction.value}, {self.substrates.num_atoms} -> {self.product.num_atoms} atoms)"


def _check_unique_maps(graph: MolGraph, side: str) -> None:
    seen: Set[int] = set()
    for i, atom in enumerate(graph.nodes):
        if not atom.map_number:
            continue
        if atom.map_number in seen:
            raise MappingError(f"map number {atom.map_number} used twice in the {side}")
        seen.add(atom.map_number)


def _check_product_maps(substrates: MolGraph, product: MolGraph) -> None:
    by_map = substrates.map_index()
    for i, atom in enumerate(product.nodes):
        if not atom.map_number:
            raise MappingError(f"product atom {i} ({atom.symbol}) is unmapped")
        partner = by_map.get(atom.map_number)
        if partner is None:
            raise MappingError(f"product map number {atom.map_number} has no substrate atom")
        if substrates.nodes[partner].atomic_number != atom.atomic_number:
            raise MappingError(f"map number {atom.map_number} joins {substrates.nodes[partner].symbol} "
                               f"to {atom.symbol}")


def _contributing_components(substrates: MolGraph, product_maps: Set[int]) -> List[List[int]]:
    return [c for c in substrates.components()
            if any(substrates.nodes[i].map_number in product_maps for i in c)]


def mark_reactants(substrates: MolGraph, product: MolGraph) -> MolGraph:
    """Flag every substrate molecule that gives at least one atom to the product."""
    product_maps = {a.map_number for a in product.nodes if a.map_number}
    flagged = {i for c in _contributing_components(substrates, product_maps) for i in c}
    nodes = tuple(replace(a, is_reactant=(i in flagged)) for i, a in enumerate(substrates.nodes))
    return MolGraph(nodes, dict(substrates.edges))


def main_component(graph: MolGraph) -> MolGraph:
    """Component with the longest canonical SMILES; ties go to the smaller string."""
    parts = graph.without_supernode().components()
    if len(parts) <= 1:
        return graph.without_supernode()
    scored = []
    for part in parts:
        sub = graph.subgraph(part)
        text = canonical_smiles(sub)
        scored.append((-len(text), text, part))
    return graph.subgraph(min(scored)[2])


def _forward_target(substrates: MolGraph, product: MolGraph) -> MolGraph:
    by_map = substrates.map_index()
    in_product = [by_map[a.map_number] for a in product.nodes]
    product_set = set(in_product)
    others = [i for i in range(substrates.num_atoms) if i not in product_set]
    combined = MolGraph.disjoint_union([product, substrates.subgraph(others)])
    # combined node k sits at source index permutation[k]
    permutation = in_product + others
    target = permute_graph(combined, permutation)
    nodes = tuple(replace(a, is_reactant=substrates.nodes[i].is_reactant) for i, a in enumerate(target.nodes))
    return normalize_hydrogens(MolGraph(nodes, dict(target.edges)))


def comparison_smiles(graph: MolGraph) -> str:
    """Map-free canonical SMILES after aromaticity perception; the key predictions are compared on."""
    return canonical_smiles(perceive_aromaticity(graph.without_supernode()).strip_maps())


def split_reaction_smiles(text: str) -> tuple:
    parts = text.strip().split(">")
    if len(parts) != 3:
        raise MappingError(f"'{text}' is not a reaction SMILES (expected reactants>reagents>products)")
    reactants, reagents, products = parts
    left = ".".join(p for p in (reactants, reagents) if p)
    if not left or not products:
        raise MappingError(f"'{text}' lacks reactants or products")
    return left, products


def reaction_from_smiles(text: str, direction: Direction = Direction.RETRO, reaction_class: Optional[int] = None,
                         reaction_id: str = "") -> Reaction:
    """Parse, normalize hydrogens and check atom maps; raises ChemError or MappingError."""
    left, right = split_reaction_smiles(text)
    substrates = normalize_hydrogens(parse_smiles(left))
    product = normalize_hydrogens(parse_smiles(right))
    _check_unique_maps(substrates, "substrates")
    _check_unique_maps(product, "product")

    if direction is Direction.FORWARD:
        product = main_component(product)
    _check_product_maps(substrates, product)

    dropped = 0
    if direction is Direction.RETRO:
        product_maps = {a.map_number for a in product.nodes}
        keep = _contributing_components(substrates, product_maps)
        dropped = len(substrates.components()) - len(keep)
        if dropped:
            logger.debug(f"{reaction_id}: dropping {dropped} substrate molecules without product atoms")
            substrates = substrates.subgraph(i for c in keep for i in c)
    else:
        substrates = mark_reactants(substrates, product)

    return Reaction(substrates=substrates, product=product, reaction_class=reaction_class,
                    direction=direction, reaction_id=reaction_id, dropped_components=dropped)


