import numpy as np

from chem.aromaticity import normalize_hydrogens
from chem.molgraph import AtomNode, BondEdge, BondType
from chem.smiles_parser import parse_smiles
from chem.stereo import permute_graph
from config.feature_config import FeatureConfig
from features.featurizer import decode_tensors, featurize, fit_config

CFG = FeatureConfig(atomic_numbers=[6, 7, 8], formal_charges=[-1, 0, 1], explicit_h_counts=[0, 1, 2, 3])


def test_shapes_follow_the_config():
    graph = parse_smiles("CC(=O)N").add_supernode()
    tensors = featurize(graph, CFG)
    assert tensors.atom_features.shape == (5, CFG.atom_width)
    assert tensors.bond_features.shape == (5, 5, CFG.bond_width)
    assert tensors.num_nodes == 5


def test_every_known_atom_sets_one_bit_per_block():
    graph = parse_smiles("CC(=O)N").add_supernode()
    tensors = featurize(graph, CFG)
    for row in tensors.atom_features[:-1]:
        assert row.sum() == len(CFG.atom_blocks)


def test_supernode_row_carries_only_its_flag():
    graph = parse_smiles("CCO").add_supernode()
    row = featurize(graph, CFG).atom_features[-1]
    assert row.sum() == 1
    assert row[1] == 1


def test_supernode_links_and_diagonal_carry_only_their_type():
    graph = parse_smiles("CCO").add_supernode()
    bonds = featurize(graph, CFG).bond_features
    supernode_column = CFG.bond_types.index("supernode")
    self_column = CFG.bond_types.index("self")
    for i in range(3):
        assert bonds[i, 3].sum() == 1 and bonds[i, 3, supernode_column] == 1
        assert bonds[3, i, supernode_column] == 1
    for i in range(4):
        assert bonds[i, i].sum() == 1 and bonds[i, i, self_column] == 1


def test_bond_features_are_symmetric():
    graph = parse_smiles("C=CC#N").add_supernode()
    bonds = featurize(graph, CFG).bond_features
    assert np.array_equal(bonds, bonds.transpose(1, 0, 2))
    assert not bonds[0, 2].any()


def test_unseen_values_encode_as_zero_blocks():
    graph = parse_smiles("CCl").add_supernode()
    row = featurize(graph, CFG).atom_features[1]
    offset = len(CFG.atom_blocks[0][1])
    assert not row[offset:offset + len(CFG.atomic_numbers)].any()
    assert row.sum() == len(CFG.atom_blocks) - 1


def test_adjacency_includes_self_and_supernode():
    graph = parse_smiles("CCO").add_supernode()
    tensors = featurize(graph, CFG)
    assert tensors.adjacency[0] == (0, 1, 3)
    assert tensors.adjacency[3] == (0, 1, 2, 3)
    receivers, senders = tensors.edge_index
    assert len(receivers) == sum(len(row) for row in tensors.adjacency)
    assert np.all(np.diff(receivers) >= 0)


def test_decode_inverts_featurize():
    graph = normalize_hydrogens(parse_smiles("CC(=O)[O-].C[NH3+]")).add_supernode()
    decoded = decode_tensors(featurize(graph, CFG), CFG)
    assert decoded.nodes == graph.nodes
    assert {k: (b.bond_type, b.stereo) for k, b in decoded.edges.items()} == \
        {k: (b.bond_type, b.stereo) for k, b in graph.edges.items()}


def test_reactant_flag_block_is_optional():
    graph = parse_smiles("CO").add_supernode()
    marked = FeatureConfig(atomic_numbers=[6, 8], formal_charges=[0], explicit_h_counts=[0], mark_reactants=True)
    flagged = graph.with_atom(0, AtomNode(6, is_reactant=True))
    tensors = featurize(flagged, marked)
    assert tensors.atom_features.shape[1] == marked.atom_width
    assert decode_tensors(tensors, marked).nodes[0].is_reactant
    assert not decode_tensors(tensors, marked).nodes[1].is_reactant


def test_edited_flags_are_encoded():
    graph = parse_smiles("CC").add_supernode()
    graph = graph.with_bond(BondEdge(0, 1, BondType.DOUBLE, is_edited=True))
    decoded = decode_tensors(featurize(graph, CFG), CFG)
    assert decoded.bond(0, 1).is_edited
    assert decoded.bond(0, 1).bond_type is BondType.DOUBLE


def test_fit_config_collects_observed_values(samples):
    cfg = fit_config(samples)
    assert {6, 7, 8}.issubset(cfg.atomic_numbers)
    assert cfg.atomic_numbers == sorted(cfg.atomic_numbers)
    assert 0 in cfg.formal_charges
    assert cfg.chiral_tags == ["none"]
    valid, _ = cfg.validate()
    assert valid


def test_featurize_commutes_with_node_relabelling():
    graph = normalize_hydrogens(parse_smiles("CC(=O)Nc1ccccc1")).add_supernode()
    tensors = featurize(graph, CFG)
    n = graph.num_nodes
    rng = np.random.default_rng(11)
    for _ in range(20):
        permutation = np.append(rng.permutation(n - 1), n - 1)
        moved = featurize(permute_graph(graph, permutation.tolist()), CFG)
        old = np.argsort(permutation)
        assert np.array_equal(moved.atom_features, tensors.atom_features[old])
        assert np.array_equal(moved.bond_features, tensors.bond_features[np.ix_(old, old)])
        assert moved.adjacency == tuple(tuple(sorted(int(permutation[j]) for j in tensors.adjacency[i]))
                                        for i in old)
