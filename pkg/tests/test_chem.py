import numpy as np
import pytest

from chem.aromaticity import normalize_hydrogens
from chem.exceptions import AlreadyPresent, SmilesSyntaxError, ValenceError
from chem.molgraph import BondType
from chem.smiles_parser import parse_smiles
from chem.smiles_writer import canonical_ranks, canonical_smiles, write_smiles
from chem.stereo import permute_graph


def test_parse_counts_heavy_atoms_and_bonds():
    graph = parse_smiles("CC(=O)O")
    assert graph.num_atoms == 4
    assert len(graph.chemical_bonds()) == 3
    assert graph.bond(1, 2).bond_type is BondType.DOUBLE
    assert graph.total_h(0) == 3
    assert graph.total_h(3) == 1


def test_parse_aromatic_ring():
    graph = parse_smiles("c1ccccc1")
    assert graph.num_atoms == 6
    assert all(atom.is_aromatic for atom in graph.nodes)
    assert all(bond.bond_type is BondType.AROMATIC for bond in graph.chemical_bonds())


def test_writer_round_trips_simple_molecules():
    for text in ("CO", "CCO", "Cc1ccccc1"):
        assert canonical_smiles(parse_smiles(text)) == text


@pytest.mark.parametrize("first, second", [
    ("OCC", "CCO"),
    ("C(=O)(C)O", "CC(=O)O"),
    ("c1ccccc1C", "Cc1ccccc1"),
    ("C1CCNCC1", "N1CCCCC1"),
])
def test_canonical_smiles_ignores_atom_order(first, second):
    assert canonical_smiles(parse_smiles(first)) == canonical_smiles(parse_smiles(second))


def test_canonical_smiles_drops_maps_unless_asked():
    mapped = normalize_hydrogens(parse_smiles("[CH3:1][OH:2]"))
    assert canonical_smiles(mapped) == canonical_smiles(parse_smiles("CO"))
    assert ":1]" in canonical_smiles(mapped, keep_maps=True)


def test_canonical_ranks_are_a_permutation():
    ranks = canonical_ranks(parse_smiles("CC(=O)OCC"))
    assert sorted(ranks) == list(range(6))


def test_disconnected_molecules_are_written_with_dots():
    text = write_smiles(parse_smiles("CO.CC"))
    assert text.count(".") == 1


def test_supernode_links_every_atom():
    graph = parse_smiles("CCO").add_supernode()
    assert graph.num_nodes == 4
    assert graph.num_atoms == 3
    assert graph.supernode_index == 3
    assert sum(1 for b in graph.edges.values() if b.bond_type is BondType.SUPERNODE) == 3
    assert graph.without_supernode().num_nodes == 3


def test_second_supernode_is_rejected():
    graph = parse_smiles("CC").add_supernode()
    with pytest.raises(AlreadyPresent):
        graph.add_supernode()


def test_added_atom_goes_before_the_supernode():
    graph = parse_smiles("CC").add_supernode()
    grown, index = graph.with_new_atom(graph.nodes[0])
    assert index == 2
    assert grown.has_supernode
    assert grown.supernode_index == 3
    assert grown.bond(2, 3).bond_type is BondType.SUPERNODE


@pytest.mark.parametrize("text", ["C1CC", "C(C", "CC)", "C==C", "[C"])
def test_malformed_smiles_raises_syntax_error(text):
    with pytest.raises(SmilesSyntaxError):
        parse_smiles(text)


def test_overbonded_carbon_raises_valence_error():
    with pytest.raises(ValenceError):
        parse_smiles("C(C)(C)(C)(C)C")


def test_normalize_hydrogens_folds_default_counts():
    graph = normalize_hydrogens(parse_smiles("[CH3][OH]"))
    assert [atom.explicit_h_count for atom in graph.nodes] == [0, 0]
    assert graph.total_h(0) == 3


def test_components_are_sorted_by_first_atom():
    assert parse_smiles("CC.O.CN").components() == [[0, 1], [2], [3, 4]]


@pytest.mark.parametrize("smiles", ["CCO", "Cc1ccccc1", "CC(=O)[O-].C[NH3+]", "C1CCNCC1", "N#CCBr"])
def test_canonical_output_agrees_with_rdkit(smiles):
    Chem = pytest.importorskip("rdkit.Chem")
    ours = canonical_smiles(parse_smiles(smiles))
    assert Chem.MolToSmiles(Chem.MolFromSmiles(ours)) == Chem.MolToSmiles(Chem.MolFromSmiles(smiles))


SYMMETRIC_MOLECULES = [
    "C[C@H](O)[C@@H](C)O",
    "C[C@H](O)[C@H](C)O",
    "C[C@H]1CC[C@@H](C)CC1",
    "C[C@H]1CC[C@H](C)CC1",
    "O[C@H]1[C@H](O)[C@@H](O)[C@H](O)[C@@H](O)[C@@H]1O",
    "C/C=C/[C@@H](O)/C=C\\C",
    "C/C=C/C=C/C",
    "Cc1ccccc1C",
    "c1ccc2ccccc2c1",
    "C1CC2CCC1CC2",
    "CC(=O)OC(C)=O",
    "CC(C)(C)OC(=O)N",
]


@pytest.mark.parametrize("smiles", SYMMETRIC_MOLECULES)
def test_canonical_smiles_survives_random_relabelling(smiles):
    graph = parse_smiles(smiles)
    expected = canonical_smiles(graph)
    rng = np.random.default_rng(7)
    seen = {canonical_smiles(permute_graph(graph, rng.permutation(graph.num_nodes).tolist()))
            for _ in range(120)}
    assert seen == {expected}


@pytest.mark.parametrize("first, second", [
    ("C[C@H](O)[C@@H](C)O", "C[C@H](O)[C@H](C)O"),
    ("C[C@H]1CC[C@@H](C)CC1", "C[C@H]1CC[C@H](C)CC1"),
    ("C/C=C/C", "C/C=C\\C"),
])
def test_stereoisomers_keep_distinct_canonical_strings(first, second):
    assert canonical_smiles(parse_smiles(first)) != canonical_smiles(parse_smiles(second))
