import numpy as np
import pytest

from actions.apply import apply_action, apply_sequence, stop_target
from actions.edit_action import (ActionTarget, AddAtom, AddBenzene, EditAtom, EditBond, Stop, action_from_line,
                                 action_to_line)
from actions.exceptions import InvalidTarget
from actions.layout import ActionLayout, action_space_layout
from actions.vocab import ActionVocab
from chem.molgraph import BondType, ChiralTag
from chem.smiles_parser import parse_smiles
from chem.smiles_writer import canonical_smiles


def test_stop_terminates_without_touching_the_graph():
    graph = parse_smiles("CC").add_supernode()
    outcome = apply_action(graph, Stop(), stop_target(graph))
    assert outcome.terminated
    assert outcome.graph is graph


def test_stop_away_from_the_supernode_is_invalid():
    graph = parse_smiles("CC").add_supernode()
    with pytest.raises(InvalidTarget):
        apply_action(graph, Stop(), ActionTarget(0))


def test_deleting_a_bond_splits_the_molecule():
    graph = parse_smiles("CC").add_supernode()
    outcome = apply_action(graph, EditBond(None), ActionTarget.bond(0, 1))
    assert not outcome.terminated
    assert outcome.graph.bond(0, 1) is None
    assert outcome.graph.nodes[0].is_edited and outcome.graph.nodes[1].is_edited
    assert canonical_smiles(outcome.graph) == "C.C"


def test_deleting_a_missing_bond_is_a_no_op():
    graph = parse_smiles("C.C").add_supernode()
    assert apply_action(graph, EditBond(None), ActionTarget.bond(0, 1)).graph is graph


def test_retyping_a_bond_marks_it_edited():
    graph = parse_smiles("CC").add_supernode()
    edited = apply_action(graph, EditBond(BondType.DOUBLE), ActionTarget.bond(0, 1)).graph
    assert edited.bond(0, 1).bond_type is BondType.DOUBLE
    assert edited.bond(0, 1).is_edited
    assert canonical_smiles(edited) == "C=C"


def test_add_atom_appends_before_the_supernode():
    graph = parse_smiles("CC").add_supernode()
    grown = apply_action(graph, AddAtom(8), ActionTarget(1)).graph
    assert grown.num_atoms == 3
    assert grown.has_supernode
    assert grown.nodes[2].atomic_number == 8
    assert grown.bond(1, 2).bond_type is BondType.SINGLE
    assert canonical_smiles(grown) == "CCO"


def test_add_benzene_builds_an_aromatic_ring():
    graph = parse_smiles("C").add_supernode()
    grown = apply_action(graph, AddBenzene(), ActionTarget(0)).graph
    assert grown.num_atoms == 7
    assert sum(1 for b in grown.chemical_bonds() if b.bond_type is BondType.AROMATIC) == 6
    assert canonical_smiles(grown) == "Cc1ccccc1"


def test_add_benzene_needs_a_carbon_anchor():
    graph = parse_smiles("O").add_supernode()
    with pytest.raises(InvalidTarget):
        apply_action(graph, AddBenzene(), ActionTarget(0))


def test_edit_atom_rewrites_charge_and_hydrogens():
    graph = parse_smiles("CN").add_supernode()
    edited = apply_action(graph, EditAtom(formal_charge=1, explicit_h_count=3), ActionTarget(1)).graph
    assert edited.nodes[1].formal_charge == 1
    assert edited.nodes[1].is_edited
    assert canonical_smiles(edited) == canonical_smiles(parse_smiles("C[NH3+]"))


def test_actions_never_target_the_supernode():
    graph = parse_smiles("CC").add_supernode()
    with pytest.raises(InvalidTarget):
        apply_action(graph, AddAtom(8), ActionTarget(graph.supernode_index))


def test_apply_sequence_stops_at_stop():
    graph = parse_smiles("C").add_supernode()
    final = apply_sequence(graph, [(AddAtom(8), ActionTarget(0)), (Stop(), ActionTarget(2)),
                                   (AddAtom(7), ActionTarget(0))])
    assert canonical_smiles(final) == "CO"


def test_bond_targets_are_ordered():
    assert ActionTarget.bond(3, 1) == ActionTarget(1, 3)
    with pytest.raises(ValueError):
        ActionTarget(2, 1)


def test_action_text_form_round_trips():
    actions = [EditAtom(formal_charge=-1, chiral_tag=ChiralTag.CW), EditBond(None), EditBond(BondType.AROMATIC),
               AddAtom(17), AddBenzene(), Stop()]
    for action in actions:
        assert action_from_line(action_to_line(action)) == action
    assert action_to_line(EditBond(None)) == "EditBond bond_type=delete stereo=none"


def test_vocabulary_always_holds_stop_and_sorts_by_kind():
    assert list(ActionVocab()) == [Stop()]
    vocab = ActionVocab([Stop(), AddAtom(8), EditBond(None), AddAtom(6), EditAtom(formal_charge=1)])
    assert [a.kind.value for a in vocab] == ["EditAtom", "EditBond", "AddAtom", "AddAtom", "Stop"]
    assert vocab.counts()["AddAtom"] == 2
    assert AddAtom(6) in vocab and AddAtom(7) not in vocab
    assert vocab.index_of(AddAtom(6)) < vocab.index_of(AddAtom(8))


def test_vocabulary_file_round_trips(tmp_path):
    vocab = ActionVocab([AddAtom(8), EditBond(None), EditBond(BondType.DOUBLE)])
    path = tmp_path / "vocab.txt"
    vocab.save(path, "abc")
    assert ActionVocab.load(path) == vocab


def test_vocabulary_load_rejects_other_files(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("EditBond bond_type=delete stereo=none\n")
    with pytest.raises(ValueError):
        ActionVocab.load(path)


def test_layout_size_and_slots():
    vocab = ActionVocab([EditAtom(formal_charge=1), AddAtom(8), EditBond(None), EditBond(BondType.DOUBLE)])
    layout = ActionLayout(vocab, 4)
    # 4 atoms x 2 atom actions + 6 pairs x 2 bond actions + Stop
    assert layout.size == 4 * 2 + 6 * 2 + 1
    assert layout.stop_slot == layout.size - 1
    assert layout.encode(Stop(), ActionTarget(4)) == layout.stop_slot
    assert layout.encode(AddAtom(8), ActionTarget(2)) == 2 * 2 + 1
    assert layout.encode(EditBond(None), ActionTarget(0, 1)) == 8


def test_layout_decode_inverts_encode():
    vocab = ActionVocab([EditAtom(formal_charge=1), AddAtom(8), EditBond(None), EditBond(BondType.DOUBLE)])
    layout = ActionLayout(vocab, 5)
    for slot in range(layout.size):
        action, target = layout.decode(slot)
        assert layout.encode(action, target) == slot
    assert layout.pairs()[layout.pair_index(2, 4)] == (2, 4)
    with pytest.raises(IndexError):
        layout.decode(layout.size)


def test_layout_for_a_single_atom_has_no_bond_block():
    vocab = ActionVocab([AddAtom(8), EditBond(None)])
    graph = parse_smiles("C").add_supernode()
    layout = action_space_layout(vocab, graph)
    assert layout.n_pairs == 0
    assert layout.size == 1 + 1


def ring_by_single_atoms(graph, anchor):
    """AddBenzene spelled out: six aromatic carbons added one by one, then the closing bond."""
    ring = []
    previous, bond_type = anchor, BondType.SINGLE
    for _ in range(6):
        graph = apply_action(graph, AddAtom(6, is_aromatic=True, bond_type=bond_type), ActionTarget(previous)).graph
        previous = graph.num_atoms - 1
        ring.append(previous)
        bond_type = BondType.AROMATIC
    return apply_action(graph, EditBond(BondType.AROMATIC), ActionTarget.bond(ring[0], ring[-1])).graph


@pytest.mark.parametrize("smiles", ["CC(=O)OCC", "CC1CCCCC1", "Cc1ccncc1", "NCC(=O)O", "C=CC#N"])
def test_add_benzene_equals_its_expanded_form(smiles):
    graph = parse_smiles(smiles).add_supernode()
    anchors = [i for i in range(graph.num_atoms)
               if graph.nodes[i].atomic_number == 6 and graph.total_h(i) > 0]
    rng = np.random.default_rng(len(smiles))
    for anchor in rng.choice(anchors, size=min(3, len(anchors)), replace=False):
        anchor = int(anchor)
        collapsed = apply_action(graph, AddBenzene(), ActionTarget(anchor)).graph
        assert canonical_smiles(collapsed) == canonical_smiles(ring_by_single_atoms(graph, anchor))
