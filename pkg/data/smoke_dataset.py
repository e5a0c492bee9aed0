"""
Synthetic atom-mapped reactions for smoke runs and tests.

Amide couplings, esterifications and N-/O-alkylations are assembled from small
building blocks. In every block the reacting atom carries map number 1
(electrophile) or 3 (nucleophile) and the leaving atom map number 2; the
assembled reaction is renumbered 1..N so every heavy atom is mapped.

Usage:
    frame = smoke_reactions(seed=0)
    python -m data.smoke_dataset smoke.csv --seed 0
"""

import argparse
import logging
from dataclasses import replace
from itertools import product as cartesian
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd

from chem.aromaticity import normalize_hydrogens
from chem.molgraph import BondEdge, BondType, MolGraph, pair
from chem.smiles_parser import parse_smiles
from chem.smiles_writer import write_smiles

logger = logging.getLogger(__name__)

ELECTROPHILE, LEAVING, NUCLEOPHILE = 1, 2, 3

ACYL_CHLORIDES = (
    "C[C:1](=O)[Cl:2]",
    "CC[C:1](=O)[Cl:2]",
    "CC(C)[C:1](=O)[Cl:2]",
    "c1ccc(cc1)[C:1](=O)[Cl:2]",
    "Cc1ccc(cc1)[C:1](=O)[Cl:2]",
    "C1CC1[C:1](=O)[Cl:2]",
    "COC[C:1](=O)[Cl:2]",
)
ACIDS = (
    "C[C:1](=O)[OH:2]",
    "CCC[C:1](=O)[OH:2]",
    "c1ccc(cc1)[C:1](=O)[OH:2]",
    "C1CC1[C:1](=O)[OH:2]",
    "CC(C)(C)[C:1](=O)[OH:2]",
    "C=C[C:1](=O)[OH:2]",
)
ALKYL_BROMIDES = (
    "C[CH2:1][Br:2]",
    "CC[CH2:1][Br:2]",
    "CC(C)[CH2:1][Br:2]",
    "C=C[CH2:1][Br:2]",
    "c1ccc(cc1)[CH2:1][Br:2]",
    "N#C[CH2:1][Br:2]",
)
AMINES = (
    "C[NH2:3]",
    "CC[NH2:3]",
    "CC(C)[NH2:3]",
    "C[NH:3]C",
    "C1CC[NH:3]CC1",
    "C1COCC[NH:3]1",
    "c1ccc(cc1)[NH2:3]",
    "c1ccc(cc1)C[NH2:3]",
    "COCC[NH2:3]",
    "C1CC[NH:3]C1",
)
ALCOHOLS = (
    "C[OH:3]",
    "CC[OH:3]",
    "CC(C)[OH:3]",
    "CCCC[OH:3]",
    "c1ccc(cc1)C[OH:3]",
    "C1CCC(CC1)[OH:3]",
)

# USPTO-50k classes: 1 heteroatom alkylation/arylation, 2 acylation and related processes
FAMILIES: Tuple[Tuple[str, Tuple[str, ...], Tuple[str, ...], int], ...] = (
    ("amide", ACYL_CHLORIDES, AMINES, 2),
    ("ester", ACIDS, ALCOHOLS, 2),
    ("n_alkyl", ALKYL_BROMIDES, AMINES, 1),
    ("o_alkyl", ALKYL_BROMIDES, ALCOHOLS, 1),
)


def combine(electrophile: str, nucleophile: str) -> str:
    """Mapped reaction SMILES joining two building blocks; the leaving atom ends up in no product."""
    e_graph, n_graph = parse_smiles(electrophile), parse_smiles(nucleophile)
    e_index, n_index = e_graph.map_index(), n_graph.map_index()
    center, leaving = e_index[ELECTROPHILE], e_index[LEAVING]
    attack = n_index[NUCLEOPHILE] + e_graph.num_nodes

    reactants = MolGraph.disjoint_union([e_graph, n_graph])
    nodes = tuple(replace(atom, map_number=k + 1) for k, atom in enumerate(reactants.nodes))
    reactants = normalize_hydrogens(MolGraph(nodes, dict(reactants.edges)))

    bonded = reactants.with_bond(BondEdge(*pair(center, attack), BondType.SINGLE))
    product = bonded.subgraph(k for k in range(bonded.num_nodes) if k != leaving)
    product = normalize_hydrogens(product)
    return f"{write_smiles(reactants)}>>{write_smiles(product)}"


def smoke_reactions(seed: int = 0, size: int = 200, valid_fraction: float = 0.1,
                    test_fraction: float = 0.1) -> pd.DataFrame:
    """Table with columns id, class, rxn, split; rows are shuffled by `seed`."""
    rows: List[dict] = []
    for family, electrophiles, nucleophiles, reaction_class in FAMILIES:
        for k, (e, n) in enumerate(cartesian(electrophiles, nucleophiles)):
            rows.append({'id': f"{family}_{k:03d}", 'class': reaction_class, 'rxn': combine(e, n)})
    order = np.random.default_rng(seed).permutation(len(rows))[:size]
    frame = pd.DataFrame([rows[i] for i in order], columns=['id', 'class', 'rxn'])

    n_valid = int(round(len(frame) * valid_fraction))
    n_test = int(round(len(frame) * test_fraction))
    n_train = len(frame) - n_valid - n_test
    frame['split'] = ['train'] * n_train + ['valid'] * n_valid + ['test'] * n_test
    logger.info(f"Built {len(frame)} smoke reactions ({n_train} train, {n_valid} valid, {n_test} test)")
    return frame


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Write a synthetic atom-mapped reaction table")
    parser.add_argument("output", type=Path)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=200)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    frame = smoke_reactions(args.seed, args.size)
    args.output.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(args.output, index=False)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
